//! Joint log-probability of a graph and its sentence under a provider.
//!
//! With a uniform provider every token costs ln(1/|V|), so the total is
//! (M + 1 + N) times that: M graph tokens, the separator, N text tokens.
//!
//! cargo run --example joint_scoring

use amrtext::decode::{score_joint, score_sequence, TokenDistributionProvider, UniformProvider, Vocabulary};
use amrtext::graph::parse_penman;
use amrtext::linearize::{assemble_joint, extract_arc_vocabulary, linearize, Representation};
use amrtext::metrics::normalize_output;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = parse_penman("(s / sleep-01 :ARG0 (c / cat :mod (b / big)))")?;
    let symbols = extract_arc_vocabulary([&g]);
    let amr = linearize(&g, Representation::DfsWithEdges)?;
    let text = normalize_output("The big cat sleeps.");

    let stream = assemble_joint(&amr, &text, &symbols)?;
    let mut words = stream.clone();
    words.sort();
    words.dedup();
    let provider = UniformProvider::new(Vocabulary::new(words)?);
    let v = provider.vocabulary().len();

    let joint = score_joint(&provider, &amr, &text, &symbols)?;
    println!("stream: {}", stream.join(" "));
    println!("amr {:.6}  text {:.6}  total {:.6}", joint.amr_logprob, joint.text_logprob, joint.total);

    let ids = provider.vocabulary().encode(&stream)?;
    println!("whole stream scored at once: {:.6}", score_sequence(&provider, &[], &ids)?);
    let k = stream.len() as f64;
    println!("closed form {k} * ln(1/{v}): {:.6}", k * (1.0 / v as f64).ln());
    Ok(())
}

