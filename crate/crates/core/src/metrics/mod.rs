//! Reference-based text metrics: corpus BLEU and chrF++, computed over
//! pre-tokenized sentence pairs produced by [`normalize_output`].

mod bleu;
mod chrf;
mod normalize;

use std::collections::HashMap;
use std::hash::Hash;

pub use bleu::{corpus_bleu, corpus_bleu_with, Smoothing, BLEU_MAX_ORDER};
pub use chrf::{chrf_pp, CHRF_BETA, CHRF_CHAR_ORDER, CHRF_WORD_ORDER};
pub use normalize::{normalize_output, PUNCTUATION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
}

impl SentencePair {
    pub fn new(hypothesis: Vec<String>, reference: Vec<String>) -> Self {
        SentencePair {
            hypothesis,
            reference,
        }
    }

    /// Normalizes both sides with [`normalize_output`].
    pub fn from_text(hypothesis: &str, reference: &str) -> Self {
        SentencePair::new(normalize_output(hypothesis), normalize_output(reference))
    }
}

/// Pairs line `i` of `hypotheses` with line `i` of `references`.
pub fn pair_lines<S: AsRef<str>>(hypotheses: &[S], references: &[S]) -> Result<Vec<SentencePair>, MetricError> {
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    Ok(hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| SentencePair::from_text(h.as_ref(), r.as_ref()))
        .collect())
}

/// A score on the 0..=100 scale.
///
/// For BLEU, `components` are the n-gram precisions (fractions) of the orders
/// that entered the geometric mean. For chrF++, they are the F-scores of the
/// orders that entered the average: character orders first, then word orders.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub value: f64,
    pub components: Vec<f64>,
    pub brevity_penalty: Option<f64>,
}

/// Per-order totals shared by both metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct OrderStats {
    pub hyp: usize,
    pub reference: usize,
    pub matched: usize,
}

impl OrderStats {
    fn add(&mut self, other: OrderStats) {
        self.hyp += other.hyp;
        self.reference += other.reference;
        self.matched += other.matched;
    }
}

fn ngrams<T: Hash + Eq>(items: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 {
        for w in items.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Counts and clipped matches for n-grams of one order.
pub(crate) fn order_stats<T: Hash + Eq>(hyp: &[T], reference: &[T], n: usize) -> OrderStats {
    let h = ngrams(hyp, n);
    let r = ngrams(reference, n);
    let matched = h
        .iter()
        .map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0)))
        .sum();
    OrderStats {
        hyp: h.values().sum(),
        reference: r.values().sum(),
        matched,
    }
}

pub(crate) fn sum_stats(per_pair: impl Iterator<Item = Vec<OrderStats>>, orders: usize) -> Vec<OrderStats> {
    let mut total = vec![OrderStats::default(); orders];
    for stats in per_pair {
        for (t, s) in total.iter_mut().zip(stats) {
            t.add(s);
        }
    }
    total
}
