//! Next-token distribution providers.
//!
//! A provider stands in for the language model: given a context of token
//! ids it returns a probability vector over its vocabulary. The crate ships
//! four of them:
//!
//! * [`UniformProvider`] for closed-form checks,
//! * [`TableProvider`], read from a text file of context-suffix rows,
//! * [`NgramProvider`], an add-k smoothed n-gram model trained on text,
//! * [`MemorizingProvider`], a weighted mixture of memorized continuations
//!   used to drive the pipeline deterministically.
//!
//! # Table file format
//!
//! ```text
//! # comment
//! vocab a b c </s>
//! unk <unk>                 # optional: token that unknown context tokens map to
//! => a=0.5 b=0.5            # empty suffix, used when nothing longer matches
//! a b => c=0.25 </s>=0.75   # contexts ending in `a b`
//! ```
//!
//! The longest matching suffix wins. Tokens missing from a row get
//! probability zero and each row must sum to one within `1e-9`.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::DecodeError;

pub type TokenId = u32;

/// Tolerance on `sum(p) == 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    unk: Option<TokenId>,
}

impl Vocabulary {
    pub fn new<I, S>(tokens: I) -> Result<Self, DecodeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(DecodeError::Vocabulary(format!("duplicate token `{t}`")));
            }
        }
        if tokens.is_empty() {
            return Err(DecodeError::Vocabulary("empty vocabulary".into()));
        }
        Ok(Vocabulary {
            tokens,
            index,
            unk: None,
        })
    }

    /// Makes unknown tokens encode to `unk` instead of failing.
    pub fn with_unk(mut self, unk: &str) -> Result<Self, DecodeError> {
        let id = self
            .id(unk)
            .ok_or_else(|| DecodeError::Vocabulary(format!("unknown token `{unk}` is not in the vocabulary")))?;
        self.unk = Some(id);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<TokenId>, DecodeError> {
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                self.id(t)
                    .or(self.unk)
                    .ok_or_else(|| DecodeError::UnknownToken(t.to_string()))
            })
            .collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&id| self.token(id).unwrap_or("<invalid>").to_string())
            .collect()
    }
}

/// Conditional next-token distribution over a fixed vocabulary.
///
/// Implementations must be deterministic for a given context and safe to
/// query from several threads.
pub trait TokenDistributionProvider: Send + Sync {
    fn vocabulary(&self) -> &Vocabulary;

    /// Probability of every vocabulary token following `context`.
    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError>;
}

impl<P: TokenDistributionProvider + ?Sized> TokenDistributionProvider for &P {
    fn vocabulary(&self) -> &Vocabulary {
        (**self).vocabulary()
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        (**self).next_distribution(context)
    }
}

impl<P: TokenDistributionProvider + ?Sized> TokenDistributionProvider for Box<P> {
    fn vocabulary(&self) -> &Vocabulary {
        (**self).vocabulary()
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        (**self).next_distribution(context)
    }
}

/// Queries `provider` and checks the result is a probability vector.
pub fn checked_distribution<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
) -> Result<Vec<f64>, DecodeError> {
    let dist = provider.next_distribution(context)?;
    check_distribution(&dist, provider.vocabulary().len())?;
    Ok(dist)
}

pub fn check_distribution(dist: &[f64], vocab_len: usize) -> Result<(), DecodeError> {
    if dist.len() != vocab_len {
        return Err(DecodeError::BadDistribution(format!(
            "{} probabilities for a vocabulary of {vocab_len}",
            dist.len()
        )));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(DecodeError::BadDistribution(format!("invalid probability {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(DecodeError::BadDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct UniformProvider {
    vocab: Vocabulary,
}

impl UniformProvider {
    pub fn new(vocab: Vocabulary) -> Self {
        UniformProvider { vocab }
    }
}

impl TokenDistributionProvider for UniformProvider {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, _context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let n = self.vocab.len();
        Ok(vec![1.0 / n as f64; n])
    }
}

/// Explicit distributions keyed by context suffix.
#[derive(Debug, Clone)]
pub struct TableProvider {
    vocab: Vocabulary,
    rows: HashMap<Vec<TokenId>, Vec<f64>>,
    max_suffix: usize,
}

impl TableProvider {
    pub fn new(vocab: Vocabulary) -> Self {
        TableProvider {
            vocab,
            rows: HashMap::new(),
            max_suffix: 0,
        }
    }

    /// Sets the distribution for contexts ending in `suffix`.
    pub fn insert(&mut self, suffix: &[TokenId], dist: Vec<f64>) -> Result<(), DecodeError> {
        check_distribution(&dist, self.vocab.len())?;
        if let Some(&bad) = suffix.iter().find(|&&t| t as usize >= self.vocab.len()) {
            return Err(DecodeError::TokenOutOfVocabulary(bad));
        }
        self.max_suffix = self.max_suffix.max(suffix.len());
        self.rows.insert(suffix.to_vec(), dist);
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, DecodeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| DecodeError::Provider(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, DecodeError> {
        let bad = |line: usize, msg: String| DecodeError::ProviderFile { line, message: msg };
        let mut table: Option<TableProvider> = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = match raw.find(" #") {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vocab ") {
                if table.is_some() {
                    return Err(bad(line_no, "vocabulary declared twice".into()));
                }
                let vocab = Vocabulary::new(rest.split_whitespace())
                    .map_err(|e| bad(line_no, e.to_string()))?;
                table = Some(TableProvider::new(vocab));
                continue;
            }
            let Some(t) = table.as_mut() else {
                return Err(bad(line_no, "expected `vocab ...` before any other line".into()));
            };
            if let Some(rest) = line.strip_prefix("unk ") {
                t.vocab = t
                    .vocab
                    .clone()
                    .with_unk(rest.trim())
                    .map_err(|e| bad(line_no, e.to_string()))?;
                continue;
            }
            let Some((lhs, rhs)) = line.split_once("=>") else {
                return Err(bad(line_no, "expected `suffix => token=p ...`".into()));
            };
            let suffix: Vec<TokenId> = lhs
                .split_whitespace()
                .map(|tok| {
                    t.vocab
                        .id(tok)
                        .ok_or_else(|| bad(line_no, format!("unknown token `{tok}`")))
                })
                .collect::<Result<_, _>>()?;
            let mut dist = vec![0.0; t.vocab.len()];
            for item in rhs.split_whitespace() {
                let (tok, p) = item
                    .rsplit_once('=')
                    .ok_or_else(|| bad(line_no, format!("expected token=p, found `{item}`")))?;
                let id = t
                    .vocab
                    .id(tok)
                    .ok_or_else(|| bad(line_no, format!("unknown token `{tok}`")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| bad(line_no, format!("bad probability `{p}`")))?;
                dist[id as usize] += p;
            }
            if t.rows.contains_key(&suffix) {
                return Err(bad(line_no, format!("duplicate row for `{}`", lhs.trim())));
            }
            t.insert(&suffix, dist).map_err(|e| bad(line_no, e.to_string()))?;
        }
        table.ok_or_else(|| bad(0, "missing `vocab` line".into()))
    }
}

impl TokenDistributionProvider for TableProvider {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let longest = self.max_suffix.min(context.len());
        for len in (0..=longest).rev() {
            if let Some(row) = self.rows.get(&context[context.len() - len..]) {
                return Ok(row.clone());
            }
        }
        Err(DecodeError::Provider(format!(
            "no table row matches context `{}`",
            self.vocab.decode(context).join(" ")
        )))
    }
}

/// Add-k smoothed n-gram model over whitespace tokens.
///
/// Each training line ends with the end token; histories are truncated at
/// the start of a line rather than padded. Context tokens outside the
/// vocabulary map to `<unk>`.
#[derive(Debug, Clone)]
pub struct NgramProvider {
    vocab: Vocabulary,
    order: usize,
    add_k: f64,
    counts: HashMap<Vec<TokenId>, HashMap<TokenId, u64>>,
}

impl NgramProvider {
    pub const END: &'static str = "</s>";
    pub const UNK: &'static str = "<unk>";

    pub fn train<S: AsRef<str>>(lines: &[S], order: usize, add_k: f64) -> Result<Self, DecodeError> {
        if order == 0 {
            return Err(DecodeError::InvalidConfig("n-gram order must be at least 1".into()));
        }
        if !(add_k > 0.0 && add_k.is_finite()) {
            return Err(DecodeError::InvalidConfig("add-k must be positive".into()));
        }
        let mut words: BTreeSet<&str> = BTreeSet::new();
        for l in lines {
            words.extend(l.as_ref().split_whitespace());
        }
        words.insert(Self::END);
        words.insert(Self::UNK);
        let vocab = Vocabulary::new(words.iter().copied())?.with_unk(Self::UNK)?;
        let end = vocab.id(Self::END).expect("end token");

        let mut counts: HashMap<Vec<TokenId>, HashMap<TokenId, u64>> = HashMap::new();
        for l in lines {
            let mut ids = vocab.encode(&l.as_ref().split_whitespace().collect::<Vec<_>>())?;
            ids.push(end);
            for i in 0..ids.len() {
                let history = ids[i.saturating_sub(order - 1)..i].to_vec();
                *counts.entry(history).or_default().entry(ids[i]).or_default() += 1;
            }
        }
        Ok(NgramProvider {
            vocab,
            order,
            add_k,
            counts,
        })
    }

    pub fn from_file(path: impl AsRef<Path>, order: usize, add_k: f64) -> Result<Self, DecodeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| DecodeError::Provider(format!("{}: {e}", path.display())))?;
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        Self::train(&lines, order, add_k)
    }

    pub fn end_token(&self) -> TokenId {
        self.vocab.id(Self::END).expect("end token")
    }
}

impl TokenDistributionProvider for NgramProvider {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let n = self.vocab.len() as f64;
        let history = &context[context.len().saturating_sub(self.order - 1)..];
        let mut dist = vec![0.0; self.vocab.len()];
        match self.counts.get(history) {
            Some(next) => {
                let total: u64 = next.values().sum();
                let denom = total as f64 + self.add_k * n;
                for (id, p) in dist.iter_mut().enumerate() {
                    let c = next.get(&(id as TokenId)).copied().unwrap_or(0) as f64;
                    *p = (c + self.add_k) / denom;
                }
            }
            None => dist.fill(1.0 / n),
        }
        Ok(dist)
    }
}

/// A mixture of memorized continuations per context.
///
/// For a context that extends one of the registered contexts by a prefix
/// `q`, every registered continuation that starts with `q` contributes its
/// weight to its next token (or to the end token once exhausted). The
/// result is mixed with `smoothing` mass spread evenly over the vocabulary,
/// so a continuation of weight `w` is decoded with probability close to `w`.
#[derive(Debug, Clone)]
pub struct MemorizingProvider {
    vocab: Vocabulary,
    end: TokenId,
    smoothing: f64,
    entries: HashMap<Vec<TokenId>, Vec<(f64, Vec<TokenId>)>>,
    context_lengths: BTreeSet<usize>,
}

impl MemorizingProvider {
    pub const DEFAULT_SMOOTHING: f64 = 1e-3;

    /// `items` holds, per context, the weighted continuations to memorize
    /// (tokens as strings, no end token).
    pub fn new(
        items: &[(Vec<String>, Vec<(f64, Vec<String>)>)],
        end_token: &str,
        smoothing: f64,
    ) -> Result<Self, DecodeError> {
        if !(0.0..1.0).contains(&smoothing) || smoothing == 0.0 {
            return Err(DecodeError::InvalidConfig("smoothing must lie in (0, 1)".into()));
        }
        let mut words: BTreeSet<&str> = BTreeSet::new();
        words.insert(end_token);
        for (ctx, conts) in items {
            words.extend(ctx.iter().map(String::as_str));
            for (_, c) in conts {
                words.extend(c.iter().map(String::as_str));
            }
        }
        let vocab = Vocabulary::new(words.iter().copied())?;
        let end = vocab.id(end_token).expect("end token");
        let mut entries: HashMap<Vec<TokenId>, Vec<(f64, Vec<TokenId>)>> = HashMap::new();
        let mut context_lengths = BTreeSet::new();
        for (ctx, conts) in items {
            let key = vocab.encode(ctx)?;
            context_lengths.insert(key.len());
            let slot = entries.entry(key).or_default();
            for (w, c) in conts {
                if !(*w > 0.0 && w.is_finite()) {
                    return Err(DecodeError::InvalidConfig(format!("weight {w} must be positive")));
                }
                slot.push((*w, vocab.encode(c)?));
            }
        }
        Ok(MemorizingProvider {
            vocab,
            end,
            smoothing,
            entries,
            context_lengths,
        })
    }

    pub fn end_token(&self) -> TokenId {
        self.end
    }
}

impl TokenDistributionProvider for MemorizingProvider {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let n = self.vocab.len();
        let floor = self.smoothing / n as f64;
        let mut dist = vec![floor; n];

        let found = self
            .context_lengths
            .iter()
            .rev()
            .filter(|&&len| len <= context.len())
            .find_map(|&len| self.entries.get(&context[..len]).map(|e| (len, e)));
        let Some((len, conts)) = found else {
            dist.fill(1.0 / n as f64);
            return Ok(dist);
        };
        let prefix = &context[len..];
        let mut mass = vec![0.0; n];
        let mut total = 0.0;
        for (w, c) in conts {
            if c.starts_with(prefix) {
                let next = c.get(prefix.len()).copied().unwrap_or(self.end);
                mass[next as usize] += w;
                total += w;
            }
        }
        if total == 0.0 {
            dist.fill(1.0 / n as f64);
            return Ok(dist);
        }
        let keep = 1.0 - self.smoothing;
        for (d, m) in dist.iter_mut().zip(&mass) {
            *d += keep * m / total;
        }
        Ok(dist)
    }
}
