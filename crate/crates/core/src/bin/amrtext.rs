//! Command-line front end for the `amrtext` library.
//!
//! On failure every subcommand prints one JSON line to stderr,
//! `{"error":"<kind>","message":"<text>"}`, and exits nonzero.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use amrtext::config::RunConfig;
use amrtext::corpus::{corpus_stats, read_corpus, Corpus};
use amrtext::graph::serialize_penman;
use amrtext::linearize::{
    assemble_joint, extract_arc_vocabulary, linearize_with, LinearizeOptions, Representation,
};
use amrtext::metrics::{chrf_pp, corpus_bleu, normalize_output, pair_lines, MetricScore};
use amrtext::pipeline::{beam_sets, decode_corpus, run_pipeline};
use amrtext::rescore::{
    read_beams, rescore_corpus, write_beams, write_selections, CandidateSet, LookupParser, ParserBackend,
    RescoreOptions, SubprocessParser,
};
use amrtext::smatch::{smatch_bruteforce, smatch_hillclimb, SmatchScore, DEFAULT_RESTARTS};

#[derive(Parser)]
#[command(name = "amrtext", version, about = "AMR graphs, linearization, decoding, Smatch and text metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Bleu,
    Chrfpp,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus and print every graph re-serialized.
    Parse {
        file: PathBuf,
        /// Also report cycles, unreachable nodes and other graph problems.
        #[arg(long)]
        validate: bool,
    },
    /// Print one linearized graph per entry: `id<TAB>tokens`.
    Linearize {
        file: PathBuf,
        #[arg(long, default_value = "dfs")]
        repr: Representation,
        #[arg(long)]
        strip_sense: bool,
        /// Append the separator and the normalized sentence.
        #[arg(long)]
        joint: bool,
    },
    /// Print the separator and the reserved symbols for every arc label.
    Vocab { file: PathBuf },
    /// Smatch between paired graphs of two corpus files.
    Smatch {
        gold: PathBuf,
        pred: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use exhaustive search instead of hill climbing.
        #[arg(long)]
        oracle: bool,
    },
    /// Corpus BLEU or chrF++ of a hypothesis file against a reference file.
    Score {
        #[arg(long, value_enum)]
        metric: Metric,
        hyp: PathBuf,
        reference: PathBuf,
    },
    /// Decode candidates for a corpus as configured; prints BEAMS.tsv rows.
    Decode {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-rank candidates by Smatch of their parses against the gold graphs.
    Rescore {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        beams: PathBuf,
        #[arg(long, required_unless_present = "parser_lookup", conflicts_with = "parser_lookup")]
        parser_cmd: Option<String>,
        /// Corpus whose `::snt` lines map sentences to their parses.
        #[arg(long)]
        parser_lookup: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Entry counts and size statistics, one block per file.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run the full generation and evaluation pipeline.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

macro_rules! line {
    ($out:expr, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

struct Failure {
    kind: &'static str,
    message: String,
    /// Stdout produced before the failure.
    output: String,
}

fn fail(kind: &'static str, e: impl std::fmt::Display) -> Failure {
    Failure {
        kind,
        message: e.to_string(),
        output: String::new(),
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn load(path: &Path) -> Result<Corpus, Failure> {
    read_corpus(path).map_err(|e| fail("corpus", e))
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(String::from).collect())
}

/// Block errors become warnings on stderr; the command carries on.
fn report_corpus_problems(c: &Corpus) {
    for e in &c.errors {
        eprintln!("warning: {e}");
    }
    for w in &c.warnings {
        eprintln!("warning: {w}");
    }
}

fn print_metric(out: &mut String, name: &str, s: &MetricScore) {
    line!(out, "{name} = {}", s.value);
    let comps: Vec<String> = s.components.iter().map(|c| c.to_string()).collect();
    line!(out, "components = {}", comps.join(" "));
    if let Some(bp) = s.brevity_penalty {
        line!(out, "brevity_penalty = {bp}");
    }
}

fn histogram(h: &std::collections::BTreeMap<usize, usize>) -> String {
    h.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
}

/// Runs one subcommand and returns what it prints on stdout.
fn run(cmd: Command) -> Result<String, Failure> {
    let mut out = String::new();
    match cmd {
        Command::Parse { file, validate } => {
            let corpus = load(&file)?;
            let mut problems = corpus.errors.len();
            for e in &corpus.errors {
                eprintln!("warning: {e}");
            }
            for entry in &corpus.entries {
                for line in entry.raw_block.lines().filter(|l| l.trim_start().starts_with('#')) {
                    line!(out, "{line}");
                }
                line!(out, "{}\n", serialize_penman(&entry.graph).map_err(|e| fail("graph", e))?);
                if validate {
                    for finding in &entry.graph.validate().findings {
                        eprintln!("warning: {}: {finding}", entry.id);
                        problems += 1;
                    }
                }
            }
            if problems > 0 {
                return Err(Failure {
                    output: out,
                    ..fail("parse", format!("{problems} problem(s) in {}", file.display()))
                });
            }
        }
        Command::Linearize {
            file,
            repr,
            strip_sense,
            joint,
        } => {
            let corpus = load(&file)?;
            report_corpus_problems(&corpus);
            let symbols = extract_arc_vocabulary(corpus.entries.iter().map(|e| &e.graph));
            for e in &corpus.entries {
                let lin = linearize_with(&e.graph, repr, LinearizeOptions { strip_sense })
                    .map_err(|err| fail("linearize", format!("{}: {err}", e.id)))?;
                let tokens = if joint {
                    assemble_joint(&lin, &normalize_output(&e.sentence), &symbols)
                        .map_err(|err| fail("linearize", format!("{}: {err}", e.id)))?
                } else {
                    lin.tokens().to_vec()
                };
                line!(out, "{}\t{}", e.id, tokens.join(" "));
            }
        }
        Command::Vocab { file } => {
            let corpus = load(&file)?;
            report_corpus_problems(&corpus);
            let symbols = extract_arc_vocabulary(corpus.entries.iter().map(|e| &e.graph));
            line!(out, "separator\t{}", symbols.separator());
            for (label, id) in symbols.reserved() {
                line!(out, "{label}\t{}", amrtext::linearize::reserved_token_name(*id));
            }
        }
        Command::Smatch {
            gold,
            pred,
            restarts,
            seed,
            oracle,
        } => {
            let g = load(&gold)?;
            let p = load(&pred)?;
            report_corpus_problems(&g);
            report_corpus_problems(&p);
            if g.entries.len() != p.entries.len() {
                return Err(fail(
                    "smatch",
                    format!("{} gold graphs but {} predicted graphs", g.entries.len(), p.entries.len()),
                ));
            }
            let (mut matched, mut gold_total, mut pred_total) = (0, 0, 0);
            for (ge, pe) in g.entries.iter().zip(&p.entries) {
                let s = if oracle {
                    smatch_bruteforce(&ge.graph, &pe.graph)
                } else {
                    smatch_hillclimb(&ge.graph, &pe.graph, restarts, seed)
                }
                .map_err(|e| fail("smatch", format!("{}: {e}", ge.id)))?;
                line!(out, "{}\t{:.4}\t{:.4}\t{:.4}", ge.id, s.precision, s.recall, s.f1);
                matched += s.matched;
                gold_total += s.gold_total;
                pred_total += s.pred_total;
            }
            let t = SmatchScore::from_counts(matched, gold_total, pred_total);
            line!(out, "total\t{:.4}\t{:.4}\t{:.4}", t.precision, t.recall, t.f1);
        }
        Command::Score { metric, hyp, reference } => {
            let pairs = pair_lines(&read_lines(&hyp)?, &read_lines(&reference)?).map_err(|e| fail("metric", e))?;
            match metric {
                Metric::Bleu => print_metric(&mut out, "bleu", &corpus_bleu(&pairs).map_err(|e| fail("metric", e))?),
                Metric::Chrfpp => print_metric(&mut out, "chrf_pp", &chrf_pp(&pairs).map_err(|e| fail("metric", e))?),
            }
        }
        Command::Decode { config } => {
            let cfg = RunConfig::from_file(&config).map_err(|e| fail("config", e))?;
            let (corpus, candidates) = decode_corpus(&cfg).map_err(|e| fail("decode", e))?;
            report_corpus_problems(&corpus);
            out.push_str(&write_beams(&beam_sets(&corpus.entries, &candidates)));
        }
        Command::Rescore {
            gold,
            beams,
            parser_cmd,
            parser_lookup,
            restarts,
            seed,
            batch_size,
        } => {
            let corpus = load(&gold)?;
            report_corpus_problems(&corpus);
            let text = std::fs::read_to_string(&beams).map_err(|e| fail("io", format!("{}: {e}", beams.display())))?;
            let beam_sets = read_beams(&text).map_err(|e| fail("rescore", e))?;
            let sets = beam_sets
                .iter()
                .map(|b| {
                    let entry = corpus
                        .entries
                        .iter()
                        .find(|e| e.id == b.set_id)
                        .ok_or_else(|| fail("rescore", format!("set `{}` has no gold graph", b.set_id)))?;
                    CandidateSet::new(entry.graph.clone(), b.candidates.clone())
                        .map_err(|e| fail("rescore", format!("{}: {e}", b.set_id)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut parser: Box<dyn ParserBackend> = match (parser_cmd, parser_lookup) {
                (Some(cmd), _) => Box::new(SubprocessParser::new(cmd)),
                (None, Some(path)) => {
                    let table = load(&path)?;
                    Box::new(LookupParser::new(table.entries.into_iter().map(|e| (e.sentence, e.graph))))
                }
                (None, None) => unreachable!("clap requires one parser"),
            };
            let opts = RescoreOptions {
                restarts,
                seed,
                batch_size,
            };
            let (results, summary) = rescore_corpus(&sets, &mut parser, &opts).map_err(|e| fail("rescore", e))?;
            out.push_str(&write_selections(&beam_sets, &results));
            eprintln!("sets = {}", summary.sets);
            eprintln!("selection_change_rate = {}", summary.selection_change_rate);
            eprintln!("mean_selected_f1 = {}", summary.mean_selected_f1);
            eprintln!("mean_top1_f1 = {}", summary.mean_top1_f1);
        }
        Command::Stats { files } => {
            for file in files {
                let corpus = load(&file)?;
                report_corpus_problems(&corpus);
                let s = corpus_stats(&corpus.entries);
                line!(out, "[{}]", file.display());
                line!(out, "entries = {}", s.entries);
                line!(out, "malformed_blocks = {}", corpus.errors.len());
                line!(out, "mean_variables = {:.4}", s.mean_variables);
                line!(out, "max_variables = {}", s.max_variables);
                line!(out, "relation_labels = {}", s.relation_labels);
                line!(out, "variable_histogram = {}", histogram(&s.variable_histogram));
                line!(out, "token_histogram = {}", histogram(&s.token_histogram));
            }
        }
        Command::Pipeline { config } => {
            let cfg = RunConfig::from_file(&config).map_err(|e| fail("config", e))?;
            let (report, files) = run_pipeline(&cfg).map_err(|e| fail("pipeline", e))?;
            for e in &report.corpus_errors {
                eprintln!("warning: {e}");
            }
            for w in &report.corpus_warnings {
                eprintln!("warning: {w}");
            }
            out.push_str(&amrtext::pipeline::metrics_report(&report));
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{{\"error\":\"usage\",\"message\":{}}}", json_string(first));
            return ExitCode::from(2);
        }
    };
    let (text, failure) = match run(cli.command) {
        Ok(text) => (text, None),
        Err(mut f) => (std::mem::take(&mut f.output), Some(f)),
    };
    let mut stdout = std::io::stdout().lock();
    let failure = match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => failure.or(Some(fail("io", e))),
        _ => failure,
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("{{\"error\":\"{}\",\"message\":{}}}", f.kind, json_string(&f.message));
            ExitCode::FAILURE
        }
    }
}
