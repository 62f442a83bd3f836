//! Corpus BLEU and chrF++ on normalized output.
//!
//! cargo run --example text_metrics

use amrtext::metrics::{chrf_pp, corpus_bleu, normalize_output, pair_lines, SentencePair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:?}", normalize_output("The cat, it seems, sat (quietly)."));

    let hyps = ["the cat sat on the mat", "a dog"];
    let refs = ["the cat is on the mat", "the dog"];
    let pairs = pair_lines(&hyps, &refs)?;
    let bleu = corpus_bleu(&pairs)?;
    let chrf = chrf_pp(&pairs)?;
    println!("BLEU    {:.4}  precisions {:?}  bp {:?}", bleu.value, bleu.components, bleu.brevity_penalty);
    println!("chrF++  {:.4}", chrf.value);

    let same = pair_lines(&refs, &refs)?;
    println!("identical: BLEU {} chrF++ {}", corpus_bleu(&same)?.value, chrf_pp(&same)?.value);

    let disjoint = [SentencePair::from_text("xyz", "abc")];
    println!("disjoint: chrF++ {}", chrf_pp(&disjoint)?.value);
    Ok(())
}
