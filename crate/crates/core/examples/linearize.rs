//! The three graph representations, sense stripping, and the joint
//! AMR/text stream a language model is trained on.
//!
//! cargo run --example linearize

use amrtext::graph::parse_penman;
use amrtext::linearize::{
    assemble_joint, extract_arc_vocabulary, linearize_with, LinearizeOptions, Representation,
};
use amrtext::metrics::normalize_output;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = parse_penman("(r / recommend-01 :ARG1 (a / advocate-01 :ARG1 (i / it) :manner (v / vigorous)))")?;

    for strip_sense in [false, true] {
        println!("strip_sense = {strip_sense}");
        for repr in [Representation::NodesOnly, Representation::DfsWithEdges, Representation::Penman] {
            let lin = linearize_with(&g, repr, LinearizeOptions { strip_sense })?;
            println!("  {repr:?}: {}", lin.joined());
        }
    }

    let symbols = extract_arc_vocabulary([&g]);
    let dfs = linearize_with(&g, Representation::DfsWithEdges, LinearizeOptions::default())?;
    let text = normalize_output("It is vigorously recommended.");
    println!("\njoint: {}", assemble_joint(&dfs, &text, &symbols)?.join(" "));
    Ok(())
}
