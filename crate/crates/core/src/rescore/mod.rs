//! Cycle-consistency re-ranking: parse each candidate sentence back to AMR
//! and prefer the candidate whose parse best matches the gold graph.

mod backend;
mod beams;

use std::fmt;

use rayon::prelude::*;

pub use backend::{parse_blocks, BackendError, LookupParser, ParserBackend, SubprocessParser};
pub use beams::{read_beams, write_beams, write_selections, BeamRow, BeamSet};

use crate::graph::AmrGraph;
use crate::smatch::{smatch_hillclimb, SmatchError, SmatchScore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RescoreError {
    #[error("candidate set is empty")]
    EmptySet,
    #[error("no candidate sets to rescore")]
    EmptyCorpus,
    #[error("candidate scores must not increase down the list (rank {rank})")]
    UnorderedScores { rank: usize },
    #[error("parser batch {batch} failed: {source}")]
    Backend {
        batch: usize,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Smatch(#[from] SmatchError),
    #[error("beams file line {line}: {message}")]
    BeamsFile { line: usize, message: String },
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
}

/// A gold graph and the model's candidates for it, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    gold: AmrGraph,
    candidates: Vec<(String, f64)>,
}

impl CandidateSet {
    pub fn new(gold: AmrGraph, candidates: Vec<(String, f64)>) -> Result<Self, RescoreError> {
        if candidates.is_empty() {
            return Err(RescoreError::EmptySet);
        }
        if let Some(rank) = candidates.windows(2).position(|w| w[1].1 > w[0].1) {
            return Err(RescoreError::UnorderedScores { rank: rank + 1 });
        }
        Ok(CandidateSet { gold, candidates })
    }

    pub fn gold(&self) -> &AmrGraph {
        &self.gold
    }

    pub fn candidates(&self) -> &[(String, f64)] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionReason {
    SmatchMax,
    TieBrokenByRank,
    AllParsesFailedFallback,
}

impl fmt::Display for SelectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionReason::SmatchMax => "smatch_max",
            SelectionReason::TieBrokenByRank => "tie_broken_by_rank",
            SelectionReason::AllParsesFailedFallback => "all_parses_failed_fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescoreResult {
    /// One entry per candidate; `None` where the parse failed.
    pub scores: Vec<Option<SmatchScore>>,
    pub selected_index: usize,
    pub reason: SelectionReason,
}

impl RescoreResult {
    /// Smatch F1 of candidate `i`, 0 for a failed parse.
    pub fn f1(&self, i: usize) -> f64 {
        self.scores[i].as_ref().map_or(0.0, |s| s.f1)
    }

    pub fn selected_f1(&self) -> f64 {
        self.f1(self.selected_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescoreOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Largest number of sentences sent to the parser per call; `None`
    /// sends everything at once.
    pub batch_size: Option<usize>,
}

impl RescoreOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        RescoreOptions {
            restarts,
            seed,
            batch_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescoreSummary {
    pub sets: usize,
    pub changed: usize,
    /// Fraction of sets whose selection is not the model's first candidate.
    pub selection_change_rate: f64,
    pub mean_selected_f1: f64,
    pub mean_top1_f1: f64,
    pub backend_calls: usize,
}

fn select(gold: &AmrGraph, parses: Vec<Option<AmrGraph>>, opts: &RescoreOptions) -> Result<RescoreResult, RescoreError> {
    let scores: Vec<Option<SmatchScore>> = parses
        .into_par_iter()
        .map(|p| p.map(|g| smatch_hillclimb(gold, &g, opts.restarts, opts.seed)).transpose())
        .collect::<Result<_, _>>()?;
    let f1 = |s: &Option<SmatchScore>| s.as_ref().map_or(0.0, |s| s.f1);

    if scores.iter().all(Option::is_none) {
        return Ok(RescoreResult {
            scores,
            selected_index: 0,
            reason: SelectionReason::AllParsesFailedFallback,
        });
    }
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if f1(s) > f1(&scores[best]) {
            best = i;
        }
    }
    let best_f1 = f1(&scores[best]);
    let tied = scores.iter().filter(|s| f1(s) == best_f1).count() > 1;
    Ok(RescoreResult {
        scores,
        selected_index: best,
        reason: if tied {
            SelectionReason::TieBrokenByRank
        } else {
            SelectionReason::SmatchMax
        },
    })
}

/// Parses every candidate of `set` in one backend call and selects the one
/// with the highest Smatch F1 against the gold graph. Ties go to the better
/// model rank. If nothing parses, candidate 0 is kept.
pub fn rescore<B: ParserBackend + ?Sized>(
    set: &CandidateSet,
    backend: &mut B,
    opts: &RescoreOptions,
) -> Result<RescoreResult, RescoreError> {
    let (mut results, _) = rescore_corpus(std::slice::from_ref(set), backend, opts)?;
    Ok(results.remove(0))
}

/// Rescores every set, sending all non-empty candidate texts to the parser
/// in as few calls as `opts.batch_size` allows. Empty candidates count as
/// failed parses without reaching the parser.
pub fn rescore_corpus<B: ParserBackend + ?Sized>(
    sets: &[CandidateSet],
    backend: &mut B,
    opts: &RescoreOptions,
) -> Result<(Vec<RescoreResult>, RescoreSummary), RescoreError> {
    if sets.is_empty() {
        return Err(RescoreError::EmptyCorpus);
    }
    if opts.restarts == 0 {
        return Err(SmatchError::NoRestarts.into());
    }
    let batch_size = match opts.batch_size {
        Some(0) => return Err(RescoreError::ZeroBatchSize),
        Some(n) => n,
        None => usize::MAX,
    };

    let mut texts: Vec<String> = Vec::new();
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for (s, set) in sets.iter().enumerate() {
        for (c, (text, _)) in set.candidates.iter().enumerate() {
            if !text.trim().is_empty() {
                texts.push(text.clone());
                slots.push((s, c));
            }
        }
    }

    let mut parses: Vec<Vec<Option<AmrGraph>>> = sets.iter().map(|s| vec![None; s.len()]).collect();
    let mut calls = 0;
    for (batch, (chunk, chunk_slots)) in texts.chunks(batch_size).zip(slots.chunks(batch_size)).enumerate() {
        let graphs = backend
            .parse_batch(chunk)
            .and_then(|g| {
                if g.len() == chunk.len() {
                    Ok(g)
                } else {
                    Err(BackendError::CountMismatch {
                        expected: chunk.len(),
                        got: g.len(),
                    })
                }
            })
            .map_err(|source| RescoreError::Backend { batch, source })?;
        calls += 1;
        for (&(s, c), g) in chunk_slots.iter().zip(graphs) {
            parses[s][c] = g;
        }
    }

    let results: Vec<RescoreResult> = sets
        .iter()
        .zip(parses)
        .map(|(set, p)| select(&set.gold, p, opts))
        .collect::<Result<_, _>>()?;

    let n = results.len() as f64;
    let changed = results.iter().filter(|r| r.selected_index != 0).count();
    let summary = RescoreSummary {
        sets: results.len(),
        changed,
        selection_change_rate: changed as f64 / n,
        mean_selected_f1: results.iter().map(RescoreResult::selected_f1).sum::<f64>() / n,
        mean_top1_f1: results.iter().map(|r| r.f1(0)).sum::<f64>() / n,
        backend_calls: calls,
    };
    Ok((results, summary))
}
