//! Text-to-AMR parsers used for cycle-consistency scoring.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use crate::graph::{parse_penman, AmrGraph};
use crate::metrics::normalize_output;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("could not run parser: {0}")]
    Spawn(String),
    #[error("parser exited with {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("parser returned {got} graphs for {expected} sentences")]
    CountMismatch { expected: usize, got: usize },
    #[error("parser i/o: {0}")]
    Io(String),
}

/// Parses sentences to graphs. A sentence the parser cannot handle yields
/// `None`; `Err` means the backend itself is unusable.
pub trait ParserBackend {
    fn parse_batch(&mut self, sentences: &[String]) -> Result<Vec<Option<AmrGraph>>, BackendError>;
}

impl<B: ParserBackend + ?Sized> ParserBackend for &mut B {
    fn parse_batch(&mut self, sentences: &[String]) -> Result<Vec<Option<AmrGraph>>, BackendError> {
        (**self).parse_batch(sentences)
    }
}

impl<B: ParserBackend + ?Sized> ParserBackend for Box<B> {
    fn parse_batch(&mut self, sentences: &[String]) -> Result<Vec<Option<AmrGraph>>, BackendError> {
        (**self).parse_batch(sentences)
    }
}

/// Splits parser output into blank-line separated blocks and parses each.
/// `#` lines are ignored; a block that does not parse is a failed sentence.
pub fn parse_blocks(output: &str) -> Vec<Option<AmrGraph>> {
    let mut blocks = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in output.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    blocks
        .into_iter()
        .map(|lines| {
            let body: Vec<&str> = lines
                .into_iter()
                .filter(|l| !l.trim_start().starts_with('#'))
                .collect();
            if body.is_empty() {
                return None;
            }
            parse_penman(&body.join("\n")).ok()
        })
        .collect()
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs an external command through `sh -c`.
///
/// If the command contains `{input}` and `{output}`, sentences are written
/// to a temporary file substituted for `{input}` and the graphs are read
/// from the file substituted for `{output}`. Otherwise sentences go to
/// standard input, one per line, and graphs are read from standard output.
/// Either way the output holds one blank-line separated PENMAN block per
/// sentence, in order.
#[derive(Debug, Clone)]
pub struct SubprocessParser {
    command: String,
}

impl SubprocessParser {
    pub fn new(command: impl Into<String>) -> Self {
        SubprocessParser {
            command: command.into(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn file_mode(&self) -> bool {
        self.command.contains("{input}") && self.command.contains("{output}")
    }

    fn run(&self, command: &str, stdin: Option<&str>) -> Result<String, BackendError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() })
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| BackendError::Spawn(e.to_string()))?;
        if let Some(text) = stdin {
            let mut pipe = child.stdin.take().expect("stdin is piped");
            let text = text.to_string();
            // Feed stdin from another thread so a chatty parser cannot
            // deadlock on a full stdout pipe.
            let writer = std::thread::spawn(move || pipe.write_all(text.as_bytes()));
            let out = child
                .wait_with_output()
                .map_err(|e| BackendError::Io(e.to_string()))?;
            // A parser may legitimately exit before reading everything.
            let _ = writer.join();
            return finish(out);
        }
        finish(
            child
                .wait_with_output()
                .map_err(|e| BackendError::Io(e.to_string()))?,
        )
    }
}

fn finish(out: std::process::Output) -> Result<String, BackendError> {
    if !out.status.success() {
        return Err(BackendError::Failed {
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    String::from_utf8(out.stdout).map_err(|e| BackendError::Io(e.to_string()))
}

impl ParserBackend for SubprocessParser {
    fn parse_batch(&mut self, sentences: &[String]) -> Result<Vec<Option<AmrGraph>>, BackendError> {
        if sentences.is_empty() {
            return Ok(Vec::new());
        }
        let input: String = sentences.iter().map(|s| one_line(s) + "\n").collect();
        let output = if self.file_mode() {
            let dir = tempfile::tempdir().map_err(|e| BackendError::Io(e.to_string()))?;
            let in_path: PathBuf = dir.path().join("input.txt");
            let out_path: PathBuf = dir.path().join("output.amr");
            std::fs::write(&in_path, &input).map_err(|e| BackendError::Io(e.to_string()))?;
            let cmd = self
                .command
                .replace("{input}", &in_path.display().to_string())
                .replace("{output}", &out_path.display().to_string());
            self.run(&cmd, None)?;
            std::fs::read_to_string(&out_path).map_err(|e| BackendError::Io(format!("{}: {e}", out_path.display())))?
        } else {
            self.run(&self.command, Some(&input))?
        };
        let graphs = parse_blocks(&output);
        if graphs.len() != sentences.len() {
            return Err(BackendError::CountMismatch {
                expected: sentences.len(),
                got: graphs.len(),
            });
        }
        Ok(graphs)
    }
}

fn lookup_key(s: &str) -> String {
    normalize_output(s).join(" ")
}

/// Looks sentences up in a fixed table. Keys and queries are compared after
/// [`normalize_output`], so case and detached punctuation do not matter.
/// Unknown sentences fail to parse.
#[derive(Debug, Clone, Default)]
pub struct LookupParser {
    table: HashMap<String, AmrGraph>,
    calls: usize,
}

impl LookupParser {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, AmrGraph)>,
        S: AsRef<str>,
    {
        LookupParser {
            table: entries
                .into_iter()
                .map(|(s, g)| (lookup_key(s.as_ref()), g))
                .collect(),
            calls: 0,
        }
    }

    /// Number of `parse_batch` calls made so far.
    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl ParserBackend for LookupParser {
    fn parse_batch(&mut self, sentences: &[String]) -> Result<Vec<Option<AmrGraph>>, BackendError> {
        self.calls += 1;
        Ok(sentences
            .iter()
            .map(|s| self.table.get(&lookup_key(s)).cloned())
            .collect())
    }
}
