//! End-to-end generation run: linearize each gold graph, decode text from
//! the joint context, optionally re-rank with cycle consistency, and score
//! the result against the corpus sentences.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{DecodeSpec, ParserSpec, ProviderSpec, RunConfig};
use crate::corpus::{read_corpus, BlockError, Corpus, CorpusEntry, CorpusError};
use crate::decode::{
    decode, strip_trailing_repetition, DecodeConfig, MemorizingProvider, NgramProvider, Strategy,
    TableProvider, TokenDistributionProvider, TokenId,
};
use crate::linearize::{assemble_joint, extract_arc_vocabulary, linearize_with, LinearizeOptions, SpecialSymbolMap};
use crate::metrics::{chrf_pp, corpus_bleu, normalize_output, pair_lines, MetricError, MetricScore};
use crate::rescore::{
    rescore_corpus, write_beams, write_selections, BeamSet, CandidateSet, LookupParser, ParserBackend,
    RescoreError, RescoreOptions, RescoreSummary, SubprocessParser,
};

pub const HYPOTHESES_FILE: &str = "hypotheses.txt";
pub const REFERENCES_FILE: &str = "references.txt";
pub const BEAMS_FILE: &str = "beams.tsv";
pub const SELECTIONS_FILE: &str = "selections.tsv";
pub const METRICS_FILE: &str = "metrics.txt";

/// End token used by memorizing providers built here.
pub const END_TOKEN: &str = "</s>";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("provider: {0}")]
    Provider(String),
    #[error("entry {id}: {message}")]
    Entry { id: String, message: String },
    #[error(transparent)]
    Rescore(#[from] RescoreError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// File contents produced by a run, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub hypotheses: String,
    pub references: String,
    pub beams: String,
    pub selections: Option<String>,
    pub metrics: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub entries: usize,
    pub bleu: MetricScore,
    pub chrf_pp: MetricScore,
    /// Scores of the model's first candidate, before re-ranking.
    pub onebest_bleu: MetricScore,
    pub onebest_chrf_pp: MetricScore,
    pub rescore: Option<RescoreSummary>,
    pub corpus_errors: Vec<BlockError>,
    pub corpus_warnings: Vec<String>,
}

struct Model {
    provider: Box<dyn TokenDistributionProvider>,
    end: TokenId,
    symbols: SpecialSymbolMap,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn entry_error(e: &CorpusEntry, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Entry {
        id: e.id.clone(),
        message: err.to_string(),
    }
}

/// The decoding context for `entry`: its linearized graph and the separator.
pub fn joint_context(
    entry: &CorpusEntry,
    cfg: &RunConfig,
    symbols: &SpecialSymbolMap,
) -> Result<Vec<String>, PipelineError> {
    let opts = LinearizeOptions {
        strip_sense: cfg.strip_sense,
    };
    let lin = linearize_with(&entry.graph, cfg.representation, opts).map_err(|e| entry_error(entry, e))?;
    assemble_joint(&lin, &[], symbols).map_err(|e| entry_error(entry, e))
}

/// Reads `id<TAB>weight<TAB>text` rows.
fn read_memorize_file(path: &Path) -> Result<HashMap<String, Vec<(f64, Vec<String>)>>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut out: HashMap<String, Vec<(f64, Vec<String>)>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, '\t').collect();
        let weight = match parts.as_slice() {
            [_, w, _] => w.trim().parse::<f64>().ok(),
            _ => None,
        };
        let Some(weight) = weight else {
            return Err(io_error(path, format!("line {}: expected `id<TAB>weight<TAB>text`", i + 1)));
        };
        out.entry(parts[0].to_string())
            .or_default()
            .push((weight, normalize_output(parts[2])));
    }
    Ok(out)
}

fn build_model(cfg: &RunConfig, entries: &[CorpusEntry]) -> Result<Model, PipelineError> {
    let provider_err = |e: &dyn std::fmt::Display| PipelineError::Provider(e.to_string());
    match &cfg.provider {
        ProviderSpec::Memorize { file, smoothing } => {
            let symbols = extract_arc_vocabulary(entries.iter().map(|e| &e.graph));
            let mut memorized = match file {
                Some(path) => {
                    let rows = read_memorize_file(path)?;
                    if let Some(id) = rows.keys().find(|id| !entries.iter().any(|e| &e.id == *id)) {
                        return Err(PipelineError::Provider(format!(
                            "{}: id `{id}` is not in the corpus",
                            path.display()
                        )));
                    }
                    rows
                }
                None => entries
                    .iter()
                    .map(|e| (e.id.clone(), vec![(1.0, normalize_output(&e.sentence))]))
                    .collect(),
            };
            let items = entries
                .iter()
                .map(|e| Ok((joint_context(e, cfg, &symbols)?, memorized.remove(&e.id).unwrap_or_default())))
                .collect::<Result<Vec<_>, PipelineError>>()?;
            let provider = MemorizingProvider::new(&items, END_TOKEN, *smoothing).map_err(|e| provider_err(&e))?;
            Ok(Model {
                end: provider.end_token(),
                provider: Box::new(provider),
                symbols,
            })
        }
        ProviderSpec::Ngram { corpus, order, add_k } => {
            let training = read_corpus(corpus)?.entries;
            let symbols = extract_arc_vocabulary(training.iter().map(|e| &e.graph));
            let lines = training
                .iter()
                .map(|e| {
                    let mut stream = joint_context(e, cfg, &symbols)?;
                    stream.extend(normalize_output(&e.sentence));
                    Ok(stream.join(" "))
                })
                .collect::<Result<Vec<_>, PipelineError>>()?;
            let provider = NgramProvider::train(&lines, *order, *add_k).map_err(|e| provider_err(&e))?;
            Ok(Model {
                end: provider.end_token(),
                provider: Box::new(provider),
                symbols,
            })
        }
        ProviderSpec::Table { file, end_token } => {
            let provider = TableProvider::from_file(file).map_err(|e| provider_err(&e))?;
            let end = provider.vocabulary().id(end_token).ok_or_else(|| {
                PipelineError::Provider(format!("end token `{end_token}` is not in the table vocabulary"))
            })?;
            Ok(Model {
                end,
                provider: Box::new(provider),
                symbols: extract_arc_vocabulary(entries.iter().map(|e| &e.graph)),
            })
        }
    }
}

/// Per-entry nucleus seed, so entries can be decoded in any order.
fn entry_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn decode_entry(
    cfg: &RunConfig,
    model: &Model,
    index: usize,
    entry: &CorpusEntry,
) -> Result<Vec<(String, f64)>, PipelineError> {
    let context = joint_context(entry, cfg, &model.symbols)?;
    let vocab = model.provider.vocabulary();
    let ids = vocab.encode(&context).map_err(|e| entry_error(entry, e))?;
    let strategy = match cfg.decode {
        DecodeSpec::Greedy => Strategy::Greedy,
        DecodeSpec::Beam { width } => Strategy::Beam { width },
        DecodeSpec::Nucleus { mass } => Strategy::Nucleus {
            mass,
            seed: entry_seed(cfg.seed, index),
        },
    };
    let mut dcfg = DecodeConfig::new(strategy, cfg.max_length, model.end);
    dcfg.length_penalty = cfg.length_penalty;
    let hyps = decode(model.provider.as_ref(), &ids, &dcfg).map_err(|e| entry_error(entry, e))?;
    Ok(hyps
        .iter()
        .map(|h| {
            let tokens = strip_trailing_repetition(&vocab.decode(h.content(model.end)));
            (tokens.join(" "), cfg.length_penalty.rank_score(h))
        })
        .collect())
}

fn backend(spec: &ParserSpec) -> Result<Box<dyn ParserBackend>, PipelineError> {
    Ok(match spec {
        ParserSpec::Lookup(path) => {
            let entries = read_corpus(path)?.entries;
            Box::new(LookupParser::new(entries.into_iter().map(|e| (e.sentence, e.graph))))
        }
        ParserSpec::Command(cmd) => Box::new(SubprocessParser::new(cmd.clone())),
    })
}

fn lines(items: impl Iterator<Item = String>) -> String {
    items.map(|l| one_line(&l) + "\n").collect()
}

/// Reads the corpus and decodes candidates for every entry, in corpus
/// order. Candidates are best first, with repetition stripped.
pub fn decode_corpus(cfg: &RunConfig) -> Result<(Corpus, Vec<Vec<(String, f64)>>), PipelineError> {
    let corpus = read_corpus(&cfg.corpus)?;
    let model = build_model(cfg, &corpus.entries)?;
    let candidates = corpus
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| decode_entry(cfg, &model, i, e))
        .collect::<Result<_, _>>()?;
    Ok((corpus, candidates))
}

/// Runs everything in memory. Nothing touches the output directory.
pub fn build_artifacts(cfg: &RunConfig) -> Result<(Artifacts, PipelineReport), PipelineError> {
    let (corpus, candidates) = decode_corpus(cfg)?;
    let entries = &corpus.entries;

    let onebest: Vec<String> = candidates.iter().map(|c| c[0].0.clone()).collect();
    let references: Vec<String> = entries.iter().map(|e| one_line(&e.sentence)).collect();

    let (finals, selections, summary) = match &cfg.rescore {
        Some(spec) => {
            let sets = entries
                .iter()
                .zip(&candidates)
                .map(|(e, c)| CandidateSet::new(e.graph.clone(), c.clone()).map_err(|err| entry_error(e, err)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut parser = backend(&spec.parser)?;
            let opts = RescoreOptions {
                restarts: spec.restarts,
                seed: cfg.seed,
                batch_size: spec.batch_size,
            };
            let (results, summary) = rescore_corpus(&sets, &mut parser, &opts)?;
            let finals = candidates
                .iter()
                .zip(&results)
                .map(|(c, r)| c[r.selected_index].0.clone())
                .collect();
            let beam_sets = beam_sets(entries, &candidates);
            (finals, Some(write_selections(&beam_sets, &results)), Some(summary))
        }
        None => (onebest.clone(), None, None),
    };

    let pairs = pair_lines(&finals, &references)?;
    let onebest_pairs = pair_lines(&onebest, &references)?;
    let report = PipelineReport {
        entries: entries.len(),
        bleu: corpus_bleu(&pairs)?,
        chrf_pp: chrf_pp(&pairs)?,
        onebest_bleu: corpus_bleu(&onebest_pairs)?,
        onebest_chrf_pp: chrf_pp(&onebest_pairs)?,
        rescore: summary,
        corpus_errors: corpus.errors.clone(),
        corpus_warnings: corpus.warnings.clone(),
    };
    let artifacts = Artifacts {
        hypotheses: lines(finals.into_iter()),
        references: lines(references.into_iter()),
        beams: write_beams(&beam_sets(entries, &candidates)),
        selections,
        metrics: metrics_report(&report),
    };
    Ok((artifacts, report))
}

pub fn beam_sets(entries: &[CorpusEntry], candidates: &[Vec<(String, f64)>]) -> Vec<BeamSet> {
    entries
        .iter()
        .zip(candidates)
        .map(|(e, c)| BeamSet {
            set_id: e.id.clone(),
            candidates: c.clone(),
        })
        .collect()
}

/// `key = value` lines; the same format the `score` command prints.
pub fn metrics_report(r: &PipelineReport) -> String {
    let mut out = String::new();
    writeln!(out, "entries = {}", r.entries).unwrap();
    writeln!(out, "bleu = {}", r.bleu.value).unwrap();
    writeln!(out, "chrf_pp = {}", r.chrf_pp.value).unwrap();
    if let Some(s) = &r.rescore {
        writeln!(out, "onebest_bleu = {}", r.onebest_bleu.value).unwrap();
        writeln!(out, "onebest_chrf_pp = {}", r.onebest_chrf_pp.value).unwrap();
        writeln!(out, "selection_change_rate = {}", s.selection_change_rate).unwrap();
        writeln!(out, "mean_selected_f1 = {}", s.mean_selected_f1).unwrap();
        writeln!(out, "mean_top1_f1 = {}", s.mean_top1_f1).unwrap();
    }
    out
}

/// Runs the pipeline and writes its artifacts to `cfg.output_dir`. On
/// error nothing is written.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(PipelineReport, Vec<PathBuf>), PipelineError> {
    let (artifacts, report) = build_artifacts(cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = vec![
        (HYPOTHESES_FILE, &artifacts.hypotheses),
        (REFERENCES_FILE, &artifacts.references),
        (BEAMS_FILE, &artifacts.beams),
        (METRICS_FILE, &artifacts.metrics),
    ];
    if let Some(s) = &artifacts.selections {
        files.push((SELECTIONS_FILE, s));
    }
    let mut written = Vec::new();
    for (name, content) in files {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok((report, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORPUS: &str = "\
# ::id one
# ::snt The cat sleeps.
(s / sleep-01 :ARG0 (c / cat))

# ::id two
# ::snt Dogs bark loudly.
(b / bark-01 :ARG0 (d / dog) :manner (l / loud))
";

    fn setup(extra: &str) -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.amr"), CORPUS).unwrap();
        let text = format!("corpus = c.amr\noutput_dir = out\nseed = 1\nprovider = memorize\n{extra}");
        let cfg = RunConfig::parse(&text, dir.path()).unwrap();
        (dir, cfg)
    }

    #[test]
    fn memorized_greedy_is_perfect() {
        let (_dir, cfg) = setup("decode = greedy\n");
        let (a, r) = build_artifacts(&cfg).unwrap();
        assert_eq!(a.hypotheses, "the cat sleeps .\ndogs bark loudly .\n");
        assert_eq!(r.bleu.value, 100.0);
        assert_eq!(r.chrf_pp.value, 100.0);
        assert!(a.selections.is_none());
    }

    #[test]
    fn writes_files_only_on_success() {
        let (dir, cfg) = setup("decode = beam\nbeam_size = 3\nrescore = true\nparser = lookup\nparser_lookup = c.amr\n");
        let (report, files) = run_pipeline(&cfg).unwrap();
        assert_eq!(files.len(), 5);
        assert_eq!(report.rescore.unwrap().mean_selected_f1, 1.0);

        std::fs::write(dir.path().join("c.amr"), "").unwrap();
        let empty = RunConfig {
            output_dir: dir.path().join("never"),
            ..cfg
        };
        assert!(matches!(run_pipeline(&empty), Err(PipelineError::Corpus(_))));
        assert!(!dir.path().join("never").exists());
    }
}
