//! Tab-separated candidate and selection files.
//!
//! `BEAMS.tsv` rows are `set_id<TAB>rank<TAB>model_log_score<TAB>text` with
//! ranks counted from 0 within each set. Selection rows are
//! `set_id<TAB>selected_index<TAB>reason<TAB>selected_f1<TAB>text`.

use std::fmt::Write as _;

use super::{RescoreError, RescoreResult};

#[derive(Debug, Clone, PartialEq)]
pub struct BeamRow {
    pub set_id: String,
    pub rank: usize,
    pub model_log_score: f64,
    pub text: String,
}

/// Candidates of one set, in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    pub set_id: String,
    pub candidates: Vec<(String, f64)>,
}

fn field(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn write_beams(sets: &[BeamSet]) -> String {
    let mut out = String::new();
    for set in sets {
        for (rank, (text, score)) in set.candidates.iter().enumerate() {
            writeln!(out, "{}\t{rank}\t{score}\t{}", field(&set.set_id), field(text)).unwrap();
        }
    }
    out
}

/// Groups rows by set id in order of first appearance. Each set must carry
/// ranks `0..k` exactly once.
pub fn read_beams(text: &str) -> Result<Vec<BeamSet>, RescoreError> {
    let bad = |line: usize, message: String| RescoreError::BeamsFile { line, message };
    let mut rows: Vec<(usize, BeamRow)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.splitn(4, '\t').collect();
        if parts.len() != 4 {
            return Err(bad(line, format!("expected 4 tab-separated fields, got {}", parts.len())));
        }
        let rank = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("bad rank `{}`", parts[1])))?;
        let model_log_score = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("bad score `{}`", parts[2])))?;
        rows.push((
            line,
            BeamRow {
                set_id: parts[0].to_string(),
                rank,
                model_log_score,
                text: parts[3].to_string(),
            },
        ));
    }

    let mut order: Vec<String> = Vec::new();
    let mut grouped: std::collections::HashMap<String, Vec<(usize, BeamRow)>> = Default::default();
    for (line, row) in rows {
        if !grouped.contains_key(&row.set_id) {
            order.push(row.set_id.clone());
        }
        grouped.entry(row.set_id.clone()).or_default().push((line, row));
    }
    let mut sets = Vec::with_capacity(order.len());
    for id in order {
        let mut rows = grouped.remove(&id).unwrap_or_default();
        rows.sort_by_key(|(_, r)| r.rank);
        for (expected, (line, row)) in rows.iter().enumerate() {
            if row.rank != expected {
                return Err(bad(*line, format!("set `{id}`: expected rank {expected}, found {}", row.rank)));
            }
        }
        sets.push(BeamSet {
            set_id: id,
            candidates: rows.into_iter().map(|(_, r)| (r.text, r.model_log_score)).collect(),
        });
    }
    Ok(sets)
}

pub fn write_selections(sets: &[BeamSet], results: &[RescoreResult]) -> String {
    let mut out = String::new();
    for (set, r) in sets.iter().zip(results) {
        let text = set
            .candidates
            .get(r.selected_index)
            .map(|c| c.0.as_str())
            .unwrap_or("");
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}",
            field(&set.set_id),
            r.selected_index,
            r.reason,
            r.selected_f1(),
            field(text)
        )
        .unwrap();
    }
    out
}
