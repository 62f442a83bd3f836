//! Re-rank decoded candidates by how well their parses match the gold graph.
//!
//! The parser here is a lookup table; `SubprocessParser` runs an external
//! command instead (one sentence per line on stdin, PENMAN blocks on
//! stdout).
//!
//! cargo run --example cycle_rescoring

use amrtext::graph::parse_penman;
use amrtext::rescore::{rescore_corpus, CandidateSet, LookupParser, RescoreOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = parse_penman("(s / see-01 :ARG0 (b / boy) :ARG1 (d / dog :mod (b2 / big)))")?;
    let mut parser = LookupParser::new([
        ("the boy sees a dog .", parse_penman("(s / see-01 :ARG0 (b / boy) :ARG1 (d / dog))")?),
        ("the boy sees a big dog .", gold.clone()),
        ("a big dog sees the boy .", parse_penman("(s / see-01 :ARG0 (d / dog :mod (b / big)) :ARG1 (b2 / boy))")?),
    ]);

    let candidates = vec![
        ("the boy sees a dog .".to_string(), -1.2),
        ("a big dog sees the boy .".to_string(), -1.9),
        ("the boy sees a big dog .".to_string(), -2.3),
        ("boy boy dog".to_string(), -4.0),
    ];
    let sets = [CandidateSet::new(gold, candidates.clone())?];
    let (results, summary) = rescore_corpus(&sets, &mut parser, &RescoreOptions::new(4, 0))?;

    let r = &results[0];
    for (i, (text, score)) in candidates.iter().enumerate() {
        let f1 = r.scores[i].as_ref().map_or("no parse".to_string(), |s| format!("{:.4}", s.f1));
        let mark = if i == r.selected_index { "*" } else { " " };
        println!("{mark} {i} {score:>5} {f1:>8}  {text}");
    }
    println!("reason: {}", r.reason);
    println!(
        "top-1 F1 {:.4}, selected F1 {:.4}, parser calls {}",
        summary.mean_top1_f1, summary.mean_selected_f1, summary.backend_calls
    );
    Ok(())
}
