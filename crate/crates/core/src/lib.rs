//! AMR-to-text generation tooling: PENMAN graphs, graph linearization for a
//! language model, decoding over a pluggable next-token provider, Smatch,
//! BLEU and chrF++, and re-ranking of decoded candidates by the Smatch of
//! their parses against the input graph.
//!
//! | module | contents |
//! |---|---|
//! | [`graph`] | [`graph::AmrGraph`], PENMAN parsing and serialization, validation |
//! | [`linearize`] | nodes, DFS and PENMAN token sequences; reserved arc symbols; joint streams |
//! | [`decode`] | providers, joint scoring, greedy, beam and nucleus decoding |
//! | [`smatch`] | triple extraction, hill-climbing and exhaustive Smatch |
//! | [`metrics`] | output normalization, corpus BLEU, chrF++ |
//! | [`rescore`] | parser backends and candidate re-ranking |
//! | [`corpus`] | AMR-bank corpus files and split statistics |
//! | [`config`], [`pipeline`] | run configuration and the end-to-end run |
//!
//! Runnable examples live in `examples/`:
//! `penman_roundtrip`, `linearize`, `joint_scoring`, `beam_vs_greedy`,
//! `nucleus`, `smatch`, `text_metrics`, `cycle_rescoring` and `pipeline`.
//!
//! ```
//! use amrtext::graph::parse_penman;
//! use amrtext::linearize::{linearize, Representation};
//!
//! let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
//! let dfs = linearize(&g, Representation::DfsWithEdges).unwrap();
//! assert_eq!(dfs.joined(), "want-01 :ARG0 boy :ARG1 go-02 :ARG0 boy");
//! ```

pub mod config;
pub mod corpus;
pub mod decode;
pub mod graph;
pub mod linearize;
pub mod metrics;
pub mod pipeline;
pub mod rescore;
pub mod smatch;
