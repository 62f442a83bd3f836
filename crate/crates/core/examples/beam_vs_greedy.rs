//! Greedy, beam and nucleus decoding over a small next-token table.
//!
//! cargo run --example beam_vs_greedy

use amrtext::decode::{decode, DecodeConfig, Strategy, TableProvider, TokenDistributionProvider};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = TableProvider::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy.table"))?;
    let vocab = table.vocabulary();
    let end = vocab.id("</s>").expect("end token");

    for strategy in [
        Strategy::Greedy,
        Strategy::Beam { width: 1 },
        Strategy::Beam { width: 3 },
        Strategy::Nucleus { mass: 0.9, seed: 7 },
    ] {
        let cfg = DecodeConfig::new(strategy, 8, end);
        let hyps = decode(&table, &[], &cfg)?;
        println!("{strategy:?}");
        for h in hyps.iter().take(3) {
            println!("  {:>9.5}  {}", h.log_score, vocab.decode(h.content(end)).join(" "));
        }
    }
    Ok(())
}
