//! Sequence scoring and decoding over a pluggable next-token provider.
//!
//! The joint objective factorizes as a prior over the linearized AMR
//! (including the separator) times the text conditioned on the whole AMR.
//! [`score_joint`] returns both factors; [`decode`] generates text given the
//! AMR context with greedy, beam or nucleus search.

mod logsum;
mod provider;
mod repetition;
mod search;

pub use logsum::ExactSum;
pub use provider::{
    check_distribution, checked_distribution, MemorizingProvider, NgramProvider, TableProvider,
    TokenDistributionProvider, TokenId, UniformProvider, Vocabulary, NORMALIZATION_TOLERANCE,
};
pub use repetition::{strip_trailing_repetition, MAX_BLOCK};
pub use search::{
    decode, decode_beam, decode_greedy, decode_nucleus, nucleus_set, sample_nucleus, score_joint,
    score_joint_with, score_sequence, DecodeConfig, Hypothesis, JointScore, LengthPenalty, Strategy,
};

use crate::linearize::LinearizeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("token `{0}` is not in the provider vocabulary")]
    UnknownToken(String),
    #[error("token id {0} is outside the provider vocabulary")]
    TokenOutOfVocabulary(TokenId),
    #[error("provider returned an invalid distribution: {0}")]
    BadDistribution(String),
    #[error("invalid decoding configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("provider file line {line}: {message}")]
    ProviderFile { line: usize, message: String },
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
}
