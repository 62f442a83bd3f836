use std::cmp::Ordering;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::logsum::ExactSum;
use super::provider::{checked_distribution, TokenDistributionProvider, TokenId};
use super::DecodeError;
use crate::linearize::{assemble_joint, LinearizedAmr, SpecialSymbolMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Greedy,
    Beam { width: usize },
    Nucleus { mass: f64, seed: u64 },
}

/// Ranking adjustment for finished beam hypotheses. `None` ranks by raw
/// log-probability.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum LengthPenalty {
    #[default]
    None,
    /// Rank by `log_score / len^alpha`.
    Exponent(f64),
}

impl LengthPenalty {
    /// The score beam search ranks `h` by.
    pub fn rank_score(self, h: &Hypothesis) -> f64 {
        match self {
            LengthPenalty::None => h.log_score,
            LengthPenalty::Exponent(alpha) => h.log_score / (h.tokens.len().max(1) as f64).powf(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig {
    pub strategy: Strategy,
    pub max_length: usize,
    pub end_token: TokenId,
    pub length_penalty: LengthPenalty,
}

impl DecodeConfig {
    pub fn new(strategy: Strategy, max_length: usize, end_token: TokenId) -> Self {
        DecodeConfig {
            strategy,
            max_length,
            end_token,
            length_penalty: LengthPenalty::None,
        }
    }

    pub fn validate(&self, vocab_len: usize) -> Result<(), DecodeError> {
        let bad = |m: String| Err(DecodeError::InvalidConfig(m));
        if self.max_length == 0 {
            return bad("max_length must be at least 1".into());
        }
        if self.end_token as usize >= vocab_len {
            return bad(format!("end token id {} outside the vocabulary", self.end_token));
        }
        match self.strategy {
            Strategy::Beam { width: 0 } => bad("beam width must be at least 1".into()),
            Strategy::Nucleus { mass, .. } if !(mass > 0.0 && mass <= 1.0) => {
                bad(format!("nucleus mass {mass} outside (0, 1]"))
            }
            _ => match self.length_penalty {
                LengthPenalty::Exponent(a) if !a.is_finite() => bad("length penalty must be finite".into()),
                _ => Ok(()),
            },
        }
    }
}

/// A decoded continuation. `tokens` includes the end token when decoding
/// stopped on it.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    pub log_score: f64,
    sum: ExactSum,
}

impl PartialEq for Hypothesis {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.log_score.to_bits() == other.log_score.to_bits()
    }
}

impl Hypothesis {
    fn empty() -> Self {
        Hypothesis {
            tokens: Vec::new(),
            log_score: 0.0,
            sum: ExactSum::new(),
        }
    }

    fn extend(&self, token: TokenId, p: f64) -> Self {
        let sum = self.sum.with(p.ln());
        let mut tokens = Vec::with_capacity(self.tokens.len() + 1);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(token);
        Hypothesis {
            log_score: sum.value(),
            tokens,
            sum,
        }
    }

    /// Tokens without a trailing end token.
    pub fn content(&self, end_token: TokenId) -> &[TokenId] {
        match self.tokens.split_last() {
            Some((&last, rest)) if last == end_token => rest,
            _ => &self.tokens,
        }
    }
}

/// Sum of ln p(continuation_j | context ++ continuation_<j).
pub fn score_sequence<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    continuation: &[TokenId],
) -> Result<f64, DecodeError> {
    sequence_sum(provider, context, continuation).map(|s| s.value())
}

fn sequence_sum<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    continuation: &[TokenId],
) -> Result<ExactSum, DecodeError> {
    let vocab_len = provider.vocabulary().len();
    if let Some(&bad) = context
        .iter()
        .chain(continuation)
        .find(|&&t| t as usize >= vocab_len)
    {
        return Err(DecodeError::TokenOutOfVocabulary(bad));
    }
    let mut sum = ExactSum::new();
    let mut ctx = context.to_vec();
    for &tok in continuation {
        let dist = checked_distribution(provider, &ctx)?;
        sum.add(dist[tok as usize].ln());
        ctx.push(tok);
    }
    Ok(sum)
}

/// The two factors of the joint AMR/text log-probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointScore {
    pub amr_logprob: f64,
    pub text_logprob: f64,
    pub total: f64,
}

/// Scores `amr ++ [separator] ++ text` as an AMR prior term (including the
/// separator) plus a text term conditioned on the full AMR and separator.
pub fn score_joint<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    amr: &LinearizedAmr,
    text_tokens: &[String],
    sym: &SpecialSymbolMap,
) -> Result<JointScore, DecodeError> {
    score_joint_with(provider, amr, text_tokens, sym, true)
}

/// As [`score_joint`]; with `score_separator = false` the separator is
/// context only and contributes to neither term.
pub fn score_joint_with<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    amr: &LinearizedAmr,
    text_tokens: &[String],
    sym: &SpecialSymbolMap,
    score_separator: bool,
) -> Result<JointScore, DecodeError> {
    let stream = assemble_joint(amr, text_tokens, sym)?;
    let ids = provider.vocabulary().encode(&stream)?;
    let amr_end = amr.len() + usize::from(score_separator);
    let context_end = amr.len() + 1;
    let amr = sequence_sum(provider, &[], &ids[..amr_end])?;
    let text = sequence_sum(provider, &ids[..context_end], &ids[context_end..])?;
    let mut total = amr.clone();
    total.merge(&text);
    Ok(JointScore {
        amr_logprob: amr.value(),
        text_logprob: text.value(),
        total: total.value(),
    })
}

/// Dispatches on `cfg.strategy`. Greedy and nucleus return one hypothesis.
pub fn decode<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    cfg: &DecodeConfig,
) -> Result<Vec<Hypothesis>, DecodeError> {
    match cfg.strategy {
        Strategy::Greedy => decode_greedy(provider, context, cfg).map(|h| vec![h]),
        Strategy::Beam { .. } => decode_beam(provider, context, cfg),
        Strategy::Nucleus { .. } => decode_nucleus(provider, context, cfg).map(|h| vec![h]),
    }
}

fn argmax(dist: &[f64]) -> TokenId {
    let mut best = 0;
    for (i, p) in dist.iter().enumerate().skip(1) {
        if *p > dist[best] {
            best = i;
        }
    }
    best as TokenId
}

/// Repeatedly emits the most probable token (lowest id on ties).
pub fn decode_greedy<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    cfg: &DecodeConfig,
) -> Result<Hypothesis, DecodeError> {
    cfg.validate(provider.vocabulary().len())?;
    let mut ctx = context.to_vec();
    let mut hyp = Hypothesis::empty();
    for _ in 0..cfg.max_length {
        let dist = checked_distribution(provider, &ctx)?;
        let tok = argmax(&dist);
        hyp = hyp.extend(tok, dist[tok as usize]);
        ctx.push(tok);
        if tok == cfg.end_token {
            break;
        }
    }
    Ok(hyp)
}

fn rank(a: &Hypothesis, b: &Hypothesis, penalty: LengthPenalty) -> Ordering {
    penalty
        .rank_score(b)
        .total_cmp(&penalty.rank_score(a))
        .then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search. Every step expands all live hypotheses by every token with
/// nonzero probability and keeps the best `width`; hypotheses ending in the
/// end token move to the finished pool, which keeps its best `width`.
/// Stops when the pool is full and its worst member ranks at least as high
/// as the best live hypothesis, when nothing is live, or at `max_length`
/// (live hypotheses then count as finished). Returns at most `width`
/// hypotheses, best first.
pub fn decode_beam<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    cfg: &DecodeConfig,
) -> Result<Vec<Hypothesis>, DecodeError> {
    cfg.validate(provider.vocabulary().len())?;
    let Strategy::Beam { width } = cfg.strategy else {
        return Err(DecodeError::InvalidConfig("decode_beam needs a beam strategy".into()));
    };
    let penalty = cfg.length_penalty;
    let mut live = vec![Hypothesis::empty()];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut ctx = context.to_vec();

    for _ in 0..cfg.max_length {
        let mut candidates = Vec::new();
        for h in &live {
            ctx.truncate(context.len());
            ctx.extend_from_slice(&h.tokens);
            let dist = checked_distribution(provider, &ctx)?;
            for (tok, &p) in dist.iter().enumerate() {
                if p > 0.0 {
                    candidates.push(h.extend(tok as TokenId, p));
                }
            }
        }
        candidates.sort_by(|a, b| rank(a, b, penalty));
        candidates.truncate(width);
        live.clear();
        for c in candidates {
            if c.tokens.last() == Some(&cfg.end_token) {
                finished.push(c);
            } else {
                live.push(c);
            }
        }
        finished.sort_by(|a, b| rank(a, b, penalty));
        finished.truncate(width);
        // Without a length penalty, extending a hypothesis never raises its
        // score, so once the pool is full and no live hypothesis beats its
        // worst member nothing can change.
        let settled = finished.len() >= width
            && live
                .first()
                .is_some_and(|best| penalty.rank_score(best) <= penalty.rank_score(&finished[width - 1]));
        if settled || live.is_empty() {
            live.clear();
            break;
        }
    }
    finished.append(&mut live);
    finished.sort_by(|a, b| rank(a, b, penalty));
    finished.truncate(width);
    Ok(finished)
}

/// The smallest set of most probable tokens whose mass reaches `mass`,
/// ordered by probability (ties by id). The token that crosses the
/// threshold is included; zero-probability tokens never are.
pub fn nucleus_set(dist: &[f64], mass: f64) -> Vec<TokenId> {
    let mut order: Vec<TokenId> = (0..dist.len() as TokenId)
        .filter(|&t| dist[t as usize] > 0.0)
        .collect();
    order.sort_by(|&a, &b| dist[b as usize].total_cmp(&dist[a as usize]).then(a.cmp(&b)));
    let mut cumulative = 0.0;
    for (i, &t) in order.iter().enumerate() {
        cumulative += dist[t as usize];
        if cumulative >= mass {
            order.truncate(i + 1);
            break;
        }
    }
    order
}

/// Samples each token from the renormalized nucleus of the next-token
/// distribution. Deterministic for a given seed.
pub fn decode_nucleus<P: TokenDistributionProvider + ?Sized>(
    provider: &P,
    context: &[TokenId],
    cfg: &DecodeConfig,
) -> Result<Hypothesis, DecodeError> {
    cfg.validate(provider.vocabulary().len())?;
    let Strategy::Nucleus { mass, seed } = cfg.strategy else {
        return Err(DecodeError::InvalidConfig("decode_nucleus needs a nucleus strategy".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ctx = context.to_vec();
    let mut hyp = Hypothesis::empty();
    for _ in 0..cfg.max_length {
        let dist = checked_distribution(provider, &ctx)?;
        let tok = sample_nucleus(&dist, mass, &mut rng);
        hyp = hyp.extend(tok, dist[tok as usize]);
        ctx.push(tok);
        if tok == cfg.end_token {
            break;
        }
    }
    Ok(hyp)
}

/// One nucleus draw from `dist`.
pub fn sample_nucleus<R: rand::Rng + ?Sized>(dist: &[f64], mass: f64, rng: &mut R) -> TokenId {
    let nucleus = nucleus_set(dist, mass);
    if nucleus.len() == 1 {
        return nucleus[0];
    }
    let weights = WeightedIndex::new(nucleus.iter().map(|&t| dist[t as usize]))
        .expect("nucleus has positive mass");
    nucleus[weights.sample(rng)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::{TableProvider, UniformProvider, Vocabulary};

    fn uniform(n: usize) -> UniformProvider {
        UniformProvider::new(Vocabulary::new((0..n).map(|i| format!("t{i}"))).unwrap())
    }

    #[test]
    fn uniform_sequence_score() {
        let p = uniform(4);
        let s = score_sequence(&p, &[0], &[1, 2, 3]).unwrap();
        assert_eq!(s, 3.0 * (0.25f64).ln());
        assert_eq!(score_sequence(&p, &[0], &[]).unwrap(), 0.0);
        assert!(matches!(
            score_sequence(&p, &[], &[9]),
            Err(DecodeError::TokenOutOfVocabulary(9))
        ));
    }

    #[test]
    fn table_sequence_score_is_product_of_rows() {
        let t = TableProvider::parse("vocab x y z\n=> x=0.2 y=0.3 z=0.5\nx => x=0.1 y=0.6 z=0.3").unwrap();
        let s = score_sequence(&t, &[2], &[0, 1]).unwrap();
        assert!((s - (0.2f64 * 0.6).ln()).abs() < 1e-15);
    }

    #[test]
    fn greedy_stops_on_end_token() {
        let t = TableProvider::parse("vocab a </s>\n=> </s>=1").unwrap();
        let h = decode_greedy(&t, &[], &DecodeConfig::new(Strategy::Greedy, 5, 1)).unwrap();
        assert_eq!(h.tokens, vec![1]);
        assert_eq!(h.log_score, 0.0);
        assert!(h.content(1).is_empty());
    }

    #[test]
    fn greedy_ties_take_lowest_id() {
        let p = uniform(3);
        let h = decode_greedy(&p, &[], &DecodeConfig::new(Strategy::Greedy, 3, 2)).unwrap();
        assert_eq!(h.tokens, vec![0, 0, 0]);
    }

    #[test]
    fn greedy_follows_argmax_chain() {
        // a -> b -> c -> </s> is the argmax walk.
        let t = TableProvider::parse(
            "vocab a b c </s>\n=> a=0.7 b=0.1 c=0.1 </s>=0.1\na => b=0.6 c=0.4\nb => c=0.9 a=0.1\nc => </s>=0.8 a=0.2",
        )
        .unwrap();
        let h = decode_greedy(&t, &[], &DecodeConfig::new(Strategy::Greedy, 10, 3)).unwrap();
        assert_eq!(h.tokens, vec![0, 1, 2, 3]);
        let expected = (0.7f64).ln() + (0.6f64).ln() + (0.9f64).ln() + (0.8f64).ln();
        assert!((h.log_score - expected).abs() < 1e-12);
        assert_eq!(h.log_score, score_sequence(&t, &[], &h.tokens).unwrap());
    }

    #[test]
    fn beam_escapes_garden_path() {
        // Greedy takes `a` (0.6) then ends with 0.55; `b` (0.4) leads
        // to `</s>` with certainty.
        let t = TableProvider::parse(
            "vocab a b </s>\n=> a=0.6 b=0.4\na => a=0.45 </s>=0.55\nb => </s>=1\na a => </s>=1",
        )
        .unwrap();
        let greedy = decode_greedy(&t, &[], &DecodeConfig::new(Strategy::Greedy, 4, 2)).unwrap();
        let beam = decode_beam(&t, &[], &DecodeConfig::new(Strategy::Beam { width: 2 }, 4, 2)).unwrap();
        assert_eq!(greedy.tokens, vec![0, 2]);
        assert_eq!(beam[0].tokens, vec![1, 2]);
        assert!(beam[0].log_score > greedy.log_score);
    }

    #[test]
    fn beam_width_one_is_greedy() {
        let t = TableProvider::parse(
            "vocab a b </s>\n=> a=0.6 b=0.4\na => a=0.45 </s>=0.55\nb => </s>=1\na a => </s>=1",
        )
        .unwrap();
        let g = decode_greedy(&t, &[], &DecodeConfig::new(Strategy::Greedy, 4, 2)).unwrap();
        let b = decode_beam(&t, &[], &DecodeConfig::new(Strategy::Beam { width: 1 }, 4, 2)).unwrap();
        assert_eq!(b, vec![g]);
    }

    #[test]
    fn beam_results_are_sorted_and_bounded() {
        let p = uniform(3);
        let out = decode_beam(&p, &[], &DecodeConfig::new(Strategy::Beam { width: 5 }, 3, 2)).unwrap();
        assert_eq!(out.len(), 5);
        for w in out.windows(2) {
            assert!(w[0].log_score >= w[1].log_score);
        }
    }

    #[test]
    fn length_penalty_prefers_longer() {
        let t = TableProvider::parse("vocab a </s>\n=> a=0.45 </s>=0.55\na => a=0.45 </s>=0.55").unwrap();
        let mut cfg = DecodeConfig::new(Strategy::Beam { width: 3 }, 4, 1);
        let raw = decode_beam(&t, &[], &cfg).unwrap();
        assert_eq!(raw[0].tokens, vec![1]);
        cfg.length_penalty = LengthPenalty::Exponent(2.0);
        let normed = decode_beam(&t, &[], &cfg).unwrap();
        assert!(normed[0].tokens.len() > 1);
    }

    #[test]
    fn nucleus_sets() {
        let d = [0.5, 0.3, 0.2];
        assert_eq!(nucleus_set(&d, 0.7), vec![0, 1]);
        assert_eq!(nucleus_set(&d, 0.5), vec![0]);
        assert_eq!(nucleus_set(&d, 1.0), vec![0, 1, 2]);
        assert_eq!(nucleus_set(&d, f64::MIN_POSITIVE), vec![0]);
        assert_eq!(nucleus_set(&[0.0, 0.5, 0.5], 1.0), vec![1, 2]);
        assert_eq!(nucleus_set(&[0.2, 0.4, 0.4], 0.3), vec![1]);
    }

    #[test]
    fn nucleus_is_seed_deterministic() {
        let p = uniform(6);
        let cfg = DecodeConfig::new(Strategy::Nucleus { mass: 0.9, seed: 7 }, 12, 5);
        let a = decode_nucleus(&p, &[], &cfg).unwrap();
        let b = decode_nucleus(&p, &[], &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log_score, score_sequence(&p, &[], &a.tokens).unwrap());
    }

    #[test]
    fn config_validation() {
        let p = uniform(3);
        let bad = [
            DecodeConfig::new(Strategy::Greedy, 0, 0),
            DecodeConfig::new(Strategy::Greedy, 3, 7),
            DecodeConfig::new(Strategy::Beam { width: 0 }, 3, 0),
            DecodeConfig::new(Strategy::Nucleus { mass: 0.0, seed: 0 }, 3, 0),
            DecodeConfig::new(Strategy::Nucleus { mass: 1.5, seed: 0 }, 3, 0),
        ];
        for cfg in bad {
            assert!(decode(&p, &[], &cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn bad_provider_is_reported() {
        struct Broken(Vocabulary);
        impl TokenDistributionProvider for Broken {
            fn vocabulary(&self) -> &Vocabulary {
                &self.0
            }
            fn next_distribution(&self, _: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
                Ok(vec![0.7, 0.7])
            }
        }
        let b = Broken(Vocabulary::new(["a", "b"]).unwrap());
        assert!(matches!(
            score_sequence(&b, &[], &[0]),
            Err(DecodeError::BadDistribution(_))
        ));
    }
}
