//! Smatch between a gold graph and a prediction, by hill climbing and by
//! exhaustive search.
//!
//! cargo run --example smatch

use amrtext::graph::parse_penman;
use amrtext::smatch::{extract_triples, smatch_bruteforce, smatch_hillclimb};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")?;
    let pred = parse_penman("(x / want-01 :ARG0 (y / girl) :ARG1 (z / go-02 :ARG0 (q / boy)))")?;

    let t = extract_triples(&gold);
    println!(
        "gold: {} instance, {} relation, {} attribute triples",
        t.instances().len(),
        t.relations().len(),
        t.attributes().len()
    );

    let hill = smatch_hillclimb(&gold, &pred, 4, 0)?;
    let exact = smatch_bruteforce(&gold, &pred)?;
    for (name, s) in [("hill climbing", &hill), ("exhaustive", &exact)] {
        println!(
            "{name:>13}: matched {}/{} gold, {} pred  P {:.4} R {:.4} F1 {:.4}",
            s.matched, s.gold_total, s.pred_total, s.precision, s.recall, s.f1
        );
    }
    for (g, p) in &hill.best_mapping.0 {
        println!("  {g} -> {p}");
    }

    let renamed = gold.rename_variables(|v| format!("{v}{v}"));
    println!("renamed copy: F1 {}", smatch_hillclimb(&gold, &renamed, 1, 0)?.f1);
    Ok(())
}
