//! Run configuration: a flat `key = value` file with a fixed schema.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys,
//! repeated keys and keys that do not apply to the chosen options are
//! errors. `seed` has no default. Relative paths are resolved against the
//! directory of the configuration file.
//!
//! | key | values | default |
//! |---|---|---|
//! | `corpus` | path to an AMR corpus | required |
//! | `output_dir` | directory for artifacts | required |
//! | `seed` | unsigned integer | required |
//! | `representation` | `nodes`, `dfs`, `penman` | `dfs` |
//! | `strip_sense` | `true`, `false` | `false` |
//! | `provider` | `memorize`, `ngram`, `table` | required |
//! | `memorize_file` | TSV `id<TAB>weight<TAB>text` (memorize) | the corpus sentences |
//! | `smoothing` | in (0, 1) (memorize) | `0.001` |
//! | `ngram_corpus` | AMR corpus to train on (ngram) | required for ngram |
//! | `ngram_order` | at least 1 (ngram) | `3` |
//! | `ngram_add_k` | positive (ngram) | `0.01` |
//! | `table_file` | table provider file (table) | required for table |
//! | `end_token` | token ending a sentence (table) | `</s>` |
//! | `decode` | `greedy`, `beam`, `nucleus` | required |
//! | `beam_size` | at least 1 (beam) | required for beam |
//! | `nucleus_p` | in (0, 1] (nucleus) | required for nucleus |
//! | `max_length` | at least 1 | `60` |
//! | `length_penalty` | exponent, or `none` | `none` |
//! | `rescore` | `true`, `false` | `false` |
//! | `parser` | `lookup`, `command` (rescore) | required for rescore |
//! | `parser_lookup` | AMR corpus mapping `::snt` to graphs (lookup) | required for lookup |
//! | `parser_cmd` | command template (command) | required for command |
//! | `restarts` | at least 1 (rescore) | `4` |
//! | `batch_size` | at least 1 (rescore) | one batch |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::decode::LengthPenalty;
use crate::linearize::Representation;
use crate::smatch::DEFAULT_RESTARTS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: cannot read {path}: {message}")]
    Unreadable { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    Memorize { file: Option<PathBuf>, smoothing: f64 },
    Ngram { corpus: PathBuf, order: usize, add_k: f64 },
    Table { file: PathBuf, end_token: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodeSpec {
    Greedy,
    Beam { width: usize },
    Nucleus { mass: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParserSpec {
    Lookup(PathBuf),
    Command(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RescoreSpec {
    pub parser: ParserSpec,
    pub restarts: usize,
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub representation: Representation,
    pub strip_sense: bool,
    pub provider: ProviderSpec,
    pub decode: DecodeSpec,
    pub max_length: usize,
    pub length_penalty: LengthPenalty,
    pub rescore: Option<RescoreSpec>,
}

const KEYS: &[&str] = &[
    "corpus",
    "output_dir",
    "seed",
    "representation",
    "strip_sense",
    "provider",
    "memorize_file",
    "smoothing",
    "ngram_corpus",
    "ngram_order",
    "ngram_add_k",
    "table_file",
    "end_token",
    "decode",
    "beam_size",
    "nucleus_p",
    "max_length",
    "length_penalty",
    "rescore",
    "parser",
    "parser_lookup",
    "parser_cmd",
    "restarts",
    "batch_size",
];

struct Fields {
    values: BTreeMap<String, (usize, String)>,
    base: PathBuf,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::Invalid(format!("missing required key `{key}`")))
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            Some((line, v)) => v.parse().map_err(|e| ConfigError::Syntax {
                line,
                message: format!("`{key}`: {e}"),
            }),
            None => default.ok_or_else(|| ConfigError::Invalid(format!("missing required key `{key}`"))),
        }
    }

    fn path(&mut self, key: &str) -> Result<PathBuf, ConfigError> {
        let (_, v) = self.required(key)?;
        Ok(self.base.join(v))
    }

    fn optional_path(&mut self, key: &str) -> Option<PathBuf> {
        self.take(key).map(|(_, v)| self.base.join(v))
    }

    /// Rejects `keys` that are present although `applies` is false.
    fn reject_unless(&self, applies: bool, keys: &[&str], condition: &str) -> Result<(), ConfigError> {
        if applies {
            return Ok(());
        }
        match keys.iter().find(|k| self.values.contains_key(**k)) {
            Some(k) => Err(ConfigError::Syntax {
                line: self.values[*k].0,
                message: format!("`{k}` only applies when {condition}"),
            }),
            None => Ok(()),
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

fn check(ok: bool, message: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid(message()))
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    /// Parses and validates `text`; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| bad(line, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(bad(line, format!("unknown key `{k}`")));
            }
            if v.is_empty() {
                return Err(bad(line, format!("empty value for `{k}`")));
            }
            if let Some((first, _)) = values.insert(k.to_string(), (line, v.to_string())) {
                return Err(bad(line, format!("`{k}` already set on line {first}")));
            }
        }
        let mut f = Fields {
            values,
            base: base.into(),
        };

        let corpus = f.path("corpus")?;
        let output_dir = f.path("output_dir")?;
        let seed = f.parse::<u64>("seed", None)?;
        let representation = f.parse("representation", Some(Representation::DfsWithEdges))?;
        let strip_sense = f.parse("strip_sense", Some(false))?;

        let (line, provider_kind) = f.required("provider")?;
        f.reject_unless(provider_kind == "memorize", &["memorize_file", "smoothing"], "provider = memorize")?;
        f.reject_unless(provider_kind == "ngram", &["ngram_corpus", "ngram_order", "ngram_add_k"], "provider = ngram")?;
        f.reject_unless(provider_kind == "table", &["table_file", "end_token"], "provider = table")?;
        let provider = match provider_kind.as_str() {
            "memorize" => ProviderSpec::Memorize {
                file: f.optional_path("memorize_file"),
                smoothing: f.parse("smoothing", Some(1e-3))?,
            },
            "ngram" => ProviderSpec::Ngram {
                corpus: f.path("ngram_corpus")?,
                order: f.parse("ngram_order", Some(3))?,
                add_k: f.parse("ngram_add_k", Some(0.01))?,
            },
            "table" => ProviderSpec::Table {
                file: f.path("table_file")?,
                end_token: f.parse("end_token", Some("</s>".to_string()))?,
            },
            other => return Err(bad(line, format!("unknown provider `{other}`"))),
        };

        let (line, decode_kind) = f.required("decode")?;
        f.reject_unless(decode_kind == "beam", &["beam_size"], "decode = beam")?;
        f.reject_unless(decode_kind == "nucleus", &["nucleus_p"], "decode = nucleus")?;
        let decode = match decode_kind.as_str() {
            "greedy" => DecodeSpec::Greedy,
            "beam" => DecodeSpec::Beam {
                width: f.parse("beam_size", None)?,
            },
            "nucleus" => DecodeSpec::Nucleus {
                mass: f.parse("nucleus_p", None)?,
            },
            other => return Err(bad(line, format!("unknown decode strategy `{other}`"))),
        };
        let max_length = f.parse("max_length", Some(60))?;
        let length_penalty = match f.take("length_penalty") {
            None => LengthPenalty::None,
            Some((_, v)) if v == "none" => LengthPenalty::None,
            Some((line, v)) => LengthPenalty::Exponent(
                v.parse()
                    .map_err(|_| bad(line, format!("`length_penalty`: expected a number or `none`, got `{v}`")))?,
            ),
        };

        let rescore_on = f.parse("rescore", Some(false))?;
        f.reject_unless(rescore_on, &["parser", "parser_lookup", "parser_cmd", "restarts", "batch_size"], "rescore = true")?;
        let rescore = if rescore_on {
            let (line, kind) = f.required("parser")?;
            f.reject_unless(kind == "lookup", &["parser_lookup"], "parser = lookup")?;
            f.reject_unless(kind == "command", &["parser_cmd"], "parser = command")?;
            let parser = match kind.as_str() {
                "lookup" => ParserSpec::Lookup(f.path("parser_lookup")?),
                "command" => ParserSpec::Command(f.required("parser_cmd")?.1),
                other => return Err(bad(line, format!("unknown parser `{other}`"))),
            };
            let restarts = f.parse("restarts", Some(DEFAULT_RESTARTS))?;
            let batch_size = match f.take("batch_size") {
                None => None,
                Some((line, v)) => Some(v.parse().map_err(|_| bad(line, format!("bad batch_size `{v}`")))?),
            };
            Some(RescoreSpec {
                parser,
                restarts,
                batch_size,
            })
        } else {
            None
        };
        debug_assert!(f.values.is_empty(), "unconsumed keys {:?}", f.values.keys());

        let cfg = RunConfig {
            corpus,
            output_dir,
            seed,
            representation,
            strip_sense,
            provider,
            decode,
            max_length,
            length_penalty,
            rescore,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every numeric range the downstream modules require.
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.max_length >= 1, || "max_length must be at least 1".into())?;
        match self.decode {
            DecodeSpec::Beam { width } => check(width >= 1, || "beam_size must be at least 1".into())?,
            DecodeSpec::Nucleus { mass } => {
                check(mass > 0.0 && mass <= 1.0, || format!("nucleus_p {mass} outside (0, 1]"))?
            }
            DecodeSpec::Greedy => {}
        }
        if let LengthPenalty::Exponent(a) = self.length_penalty {
            check(a.is_finite(), || "length_penalty must be finite".into())?;
        }
        match &self.provider {
            ProviderSpec::Memorize { smoothing, .. } => {
                check(*smoothing > 0.0 && *smoothing < 1.0, || format!("smoothing {smoothing} outside (0, 1)"))?
            }
            ProviderSpec::Ngram { order, add_k, .. } => {
                check(*order >= 1, || "ngram_order must be at least 1".into())?;
                check(*add_k > 0.0 && add_k.is_finite(), || "ngram_add_k must be positive".into())?;
            }
            ProviderSpec::Table { end_token, .. } => {
                check(!end_token.trim().is_empty(), || "end_token must not be blank".into())?
            }
        }
        if let Some(r) = &self.rescore {
            check(r.restarts >= 1, || "restarts must be at least 1".into())?;
            check(r.batch_size != Some(0), || "batch_size must be at least 1".into())?;
            if let ParserSpec::Command(c) = &r.parser {
                check(!c.trim().is_empty(), || "parser_cmd must not be blank".into())?;
            }
        }
        Ok(())
    }
}
