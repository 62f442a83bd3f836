//! The whole run: decode every corpus entry, optionally re-rank by parse
//! Smatch, and score against the references.
//!
//! cargo run --example pipeline [-- config]
//!
//! Defaults to the rank-2 fixture, where the memorized reference is only
//! the second beam candidate and re-ranking recovers it.

use amrtext::config::RunConfig;
use amrtext::pipeline::{metrics_report, run_pipeline};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/rank2.cfg").into());
    let mut cfg = RunConfig::from_file(&path)?;
    let out = tempfile::tempdir()?;
    cfg.output_dir = out.path().to_path_buf();

    let (report, files) = run_pipeline(&cfg)?;
    print!("{}", metrics_report(&report));
    for f in files {
        println!("wrote {}", f.file_name().unwrap_or_default().to_string_lossy());
    }

    let selections = std::fs::read_to_string(out.path().join(amrtext::pipeline::SELECTIONS_FILE))?;
    println!("\n{}", selections.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
