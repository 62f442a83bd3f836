use super::{order_stats, sum_stats, MetricError, MetricScore, SentencePair};

pub const BLEU_MAX_ORDER: usize = 4;

/// What to do with an n-gram order that has no matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoothing {
    /// The k-th order without matches gets precision `1 / (2^k * total)`.
    #[default]
    Exp,
    /// Zero precision, so the whole score is zero.
    None,
}

/// Corpus BLEU with exponential smoothing.
pub fn corpus_bleu(pairs: &[SentencePair]) -> Result<MetricScore, MetricError> {
    corpus_bleu_with(pairs, Smoothing::Exp)
}

/// Clipped n-gram counts are summed over the corpus before the precisions
/// are taken. Orders for which the hypotheses contain no n-grams at all are
/// left out of the geometric mean, so one- to three-token corpora can still
/// reach 100.
pub fn corpus_bleu_with(pairs: &[SentencePair], smoothing: Smoothing) -> Result<MetricScore, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let stats = sum_stats(
        pairs.iter().map(|p| {
            (1..=BLEU_MAX_ORDER)
                .map(|n| order_stats(&p.hypothesis, &p.reference, n))
                .collect()
        }),
        BLEU_MAX_ORDER,
    );
    let hyp_len: usize = pairs.iter().map(|p| p.hypothesis.len()).sum();
    let ref_len: usize = pairs.iter().map(|p| p.reference.len()).sum();

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };

    let mut precisions = Vec::new();
    let mut zero_orders = 0;
    for s in stats.iter().take_while(|s| s.hyp > 0) {
        let p = if s.matched > 0 {
            s.matched as f64 / s.hyp as f64
        } else {
            match smoothing {
                Smoothing::Exp => {
                    zero_orders += 1;
                    1.0 / (2f64.powi(zero_orders) * s.hyp as f64)
                }
                Smoothing::None => 0.0,
            }
        };
        precisions.push(p);
    }

    let value = if precisions.is_empty() || precisions.contains(&0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };
    Ok(MetricScore {
        value: value.min(100.0),
        components: precisions,
        brevity_penalty: Some(brevity_penalty),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(h: &str, r: &str) -> SentencePair {
        SentencePair::new(
            h.split_whitespace().map(String::from).collect(),
            r.split_whitespace().map(String::from).collect(),
        )
    }

    #[test]
    fn identity_is_100() {
        for s in ["a", "a b", "a b c", "the cat sat on the mat"] {
            let score = corpus_bleu(&[pair(s, s)]).unwrap();
            assert_eq!(score.value, 100.0, "{s}");
        }
    }

    #[test]
    fn repeated_word_against_short_reference() {
        // p1 = 1/4; orders 2..4 have no matches: 1/(2*3), 1/(4*2), 1/(8*1).
        let s = corpus_bleu(&[pair("the the the the", "the cat")]).unwrap();
        let expected = 100.0 * (0.25f64 * (1.0 / 6.0) * (1.0 / 8.0) * (1.0 / 8.0)).powf(0.25);
        assert!((s.value - expected).abs() < 1e-9, "{} vs {expected}", s.value);
        assert_eq!(s.brevity_penalty, Some(1.0));
        assert_eq!(s.components.len(), 4);

        let strict = corpus_bleu_with(&[pair("the the the the", "the cat")], Smoothing::None).unwrap();
        assert_eq!(strict.value, 0.0);
    }

    #[test]
    fn brevity_penalty_scales_perfect_precision() {
        // Hypothesis is a prefix of the reference: every precision is 1.
        let s = corpus_bleu(&[pair("a b c d", "a b c d e f")]).unwrap();
        let bp = (1.0f64 - 6.0 / 4.0).exp();
        assert!((s.value - 100.0 * bp).abs() < 1e-9);
        assert_eq!(s.components, vec![1.0; 4]);
    }

    #[test]
    fn empty_corpus_and_empty_hypothesis() {
        assert_eq!(corpus_bleu(&[]), Err(MetricError::EmptyCorpus));
        assert_eq!(corpus_bleu(&[pair("", "a b")]).unwrap().value, 0.0);
    }
}
