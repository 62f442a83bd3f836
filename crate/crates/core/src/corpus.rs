//! AMR-bank style corpus files: blank-line separated blocks, each with
//! `# ::key value` metadata lines followed by one PENMAN graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::graph::{parse_penman, AmrGraph};
use crate::metrics::normalize_output;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("no parseable blocks ({} malformed)", .0.len())]
    NoEntries(Vec<BlockError>),
}

/// A block that could not be read. `line` is the 1-based line in the file
/// where the block starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockError {
    pub block: usize,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for BlockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {} (line {}): {}", self.block, self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub sentence: String,
    pub graph: AmrGraph,
    /// The block as it appeared in the file, metadata included.
    pub raw_block: String,
}

impl CorpusEntry {
    pub fn new(id: impl Into<String>, sentence: impl Into<String>, graph: AmrGraph) -> Self {
        let id = id.into();
        let sentence = sentence.into();
        let raw_block = format!("# ::id {id}\n# ::snt {sentence}\n{graph}");
        CorpusEntry {
            id,
            sentence,
            graph,
            raw_block,
        }
    }
}

/// Entries plus everything that went wrong on the way.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub errors: Vec<BlockError>,
    pub warnings: Vec<String>,
}

/// `::key value` pairs on one metadata line. Several may share a line, as in
/// `# ::id x ::date 2020-01-01`.
fn metadata_fields(line: &str) -> Vec<(&str, &str)> {
    let body = line.trim_start_matches('#').trim();
    let mut out = Vec::new();
    for chunk in body.split("::").skip(1) {
        let chunk = chunk.trim();
        let (key, value) = chunk.split_once(char::is_whitespace).unwrap_or((chunk, ""));
        if !key.is_empty() {
            out.push((key, value.trim()));
        }
    }
    out
}

pub fn parse_corpus(text: &str) -> Corpus {
    let mut corpus = Corpus::default();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let mut blocks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !block.is_empty() {
                blocks.push(std::mem::take(&mut block));
            }
        } else {
            block.push((i + 1, line));
        }
    }
    if !block.is_empty() {
        blocks.push(block);
    }

    for (b, lines) in blocks.into_iter().enumerate() {
        let number = b + 1;
        let start = lines[0].0;
        let mut id = None;
        let mut sentence = None;
        let mut graph_lines = Vec::new();
        for &(_, line) in &lines {
            if line.trim_start().starts_with('#') {
                for (k, v) in metadata_fields(line) {
                    match k {
                        "id" if id.is_none() => id = Some(v.to_string()),
                        "snt" if sentence.is_none() => sentence = Some(v.to_string()),
                        _ => {}
                    }
                }
            } else {
                graph_lines.push(line);
            }
        }
        let raw_block = lines.iter().map(|l| l.1).collect::<Vec<_>>().join("\n");
        if graph_lines.is_empty() {
            corpus.errors.push(BlockError {
                block: number,
                line: start,
                message: "no graph".into(),
            });
            continue;
        }
        let graph = match parse_penman(&graph_lines.join("\n")) {
            Ok(g) => g,
            Err(e) => {
                corpus.errors.push(BlockError {
                    block: number,
                    line: start,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let id = id.unwrap_or_else(|| {
            corpus
                .warnings
                .push(format!("block {number} (line {start}): no ::id, using `block-{number}`"));
            format!("block-{number}")
        });
        let sentence = sentence.unwrap_or_else(|| {
            corpus.warnings.push(format!("block {number} (line {start}): no ::snt"));
            String::new()
        });
        corpus.entries.push(CorpusEntry {
            id,
            sentence,
            graph,
            raw_block,
        });
    }
    corpus
}

/// Reads a corpus file. Malformed blocks are reported in
/// [`Corpus::errors`]; a file with no readable block at all is an error.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Unreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let corpus = parse_corpus(&text);
    if corpus.entries.is_empty() {
        return Err(CorpusError::NoEntries(corpus.errors));
    }
    Ok(corpus)
}

pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(e.raw_block.trim_end());
        out.push_str("\n\n");
    }
    out
}

/// Summary of one corpus split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitStats {
    pub entries: usize,
    pub mean_variables: f64,
    pub max_variables: usize,
    /// Distinct edge roles, as written.
    pub relation_labels: usize,
    /// Variables per graph -> number of graphs.
    pub variable_histogram: BTreeMap<usize, usize>,
    /// Normalized sentence length -> number of sentences.
    pub token_histogram: BTreeMap<usize, usize>,
}

pub fn corpus_stats(entries: &[CorpusEntry]) -> SplitStats {
    let mut stats = SplitStats {
        entries: entries.len(),
        ..Default::default()
    };
    let mut labels = BTreeSet::new();
    let mut total_vars = 0;
    for e in entries {
        let vars = e.graph.variable_count();
        total_vars += vars;
        stats.max_variables = stats.max_variables.max(vars);
        *stats.variable_histogram.entry(vars).or_default() += 1;
        *stats
            .token_histogram
            .entry(normalize_output(&e.sentence).len())
            .or_default() += 1;
        labels.extend(e.graph.edges().iter().map(|edge| edge.role.as_str()));
    }
    stats.relation_labels = labels.len();
    if !entries.is_empty() {
        stats.mean_variables = total_vars as f64 / entries.len() as f64;
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "\
# ::id a1 ::date 2024-01-01
# ::snt The cat sleeps.
(s / sleep-01
   :ARG0 (c / cat))

# ::id a2
# ::snt Dogs bark.
(b / bark-01 :ARG0 (d / dog))

# ::id a3
# ::snt No.
(n / no)
";

    #[test]
    fn three_blocks() {
        let c = parse_corpus(THREE);
        assert_eq!(c.entries.len(), 3);
        assert!(c.errors.is_empty() && c.warnings.is_empty());
        assert_eq!(c.entries[0].id, "a1");
        assert_eq!(c.entries[0].sentence, "The cat sleeps.");
        assert!(c.entries[0].raw_block.contains("::date 2024-01-01"));
        assert_eq!(c.entries[0].graph.variable_count(), 2);
    }

    #[test]
    fn missing_sentence_warns() {
        let c = parse_corpus("# ::id x\n(a / cat)\n");
        assert_eq!(c.entries[0].sentence, "");
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn malformed_block_is_reported() {
        let text = THREE.replace("(b / bark-01 :ARG0 (d / dog))", "(b / bark-01 :ARG0 (d / dog)");
        let c = parse_corpus(&text);
        assert_eq!(c.entries.len(), 2);
        assert_eq!(c.errors.len(), 1);
        assert_eq!(c.errors[0].block, 2);
        assert_eq!(c.errors[0].line, 6);
    }

    #[test]
    fn round_trip() {
        let c = parse_corpus(THREE);
        let again = parse_corpus(&write_corpus(&c.entries));
        assert_eq!(again.entries, c.entries);

        let built = vec![CorpusEntry::new("z", "A cat.", parse_penman("(c / cat)").unwrap())];
        assert_eq!(parse_corpus(&write_corpus(&built)).entries, built);
    }

    #[test]
    fn stats() {
        let s = corpus_stats(&parse_corpus(THREE).entries);
        assert_eq!(s.entries, 3);
        assert_eq!(s.max_variables, 2);
        assert!((s.mean_variables - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.relation_labels, 1);
        assert_eq!(s.variable_histogram[&2], 2);
        assert_eq!(s.token_histogram[&4], 1);
    }

    #[test]
    fn unreadable_and_empty_files() {
        assert!(matches!(read_corpus("/nonexistent/x.amr"), Err(CorpusError::Unreadable { .. })));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.amr");
        std::fs::write(&p, "# ::id x\n(a / \n").unwrap();
        assert!(matches!(read_corpus(&p), Err(CorpusError::NoEntries(e)) if e.len() == 1));
    }
}
