//! Read a corpus, re-serialize every graph and check that nothing changed.
//!
//! cargo run --example penman_roundtrip [-- path/to/corpus.amr]

use amrtext::corpus::read_corpus;
use amrtext::graph::{graph_equal, parse_penman, serialize_penman};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.amr").into());
    let corpus = read_corpus(&path)?;

    let mut same = 0;
    for entry in &corpus.entries {
        let text = serialize_penman(&entry.graph)?;
        if graph_equal(&parse_penman(&text)?, &entry.graph) {
            same += 1;
        }
    }
    println!("{same}/{} graphs survive parse -> serialize -> parse", corpus.entries.len());
    println!("{} malformed blocks", corpus.errors.len());

    let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")?;
    println!("\n{}", serialize_penman(&g)?);
    for r in g.relations() {
        println!("{} {} {}", r.source, r.role, r.target);
    }

    // Roles keep the direction they were written in; Smatch is what
    // normalizes `:ARG0-of` to `:ARG0`.
    let inv = parse_penman("(b / boy :ARG0-of (w / want-01))")?;
    for r in inv.relations() {
        println!("\n{} {} {}", r.source, r.role, r.target);
    }
    Ok(())
}
