mod common;

use amrtext::metrics::{chrf_pp, corpus_bleu, normalize_output, pair_lines, SentencePair};
use common::oracle::{self, CORPORA};
use proptest::prelude::*;

fn corpus(rows: &[(&str, &str)]) -> (Vec<SentencePair>, Vec<(Vec<String>, Vec<String>)>) {
    let pairs: Vec<SentencePair> = rows.iter().map(|(h, r)| SentencePair::from_text(h, r)).collect();
    let raw = pairs.iter().map(|p| (p.hypothesis.clone(), p.reference.clone())).collect();
    (pairs, raw)
}

#[test]
fn bleu_and_chrf_match_counting_oracles() {
    for rows in CORPORA {
        let (pairs, raw) = corpus(rows);
        let b = corpus_bleu(&pairs).unwrap().value;
        let c = chrf_pp(&pairs).unwrap().value;
        assert!((b - oracle::bleu(&raw)).abs() < 1e-9, "{rows:?}: bleu {b} vs {}", oracle::bleu(&raw));
        assert!((c - oracle::chrf_pp(&raw)).abs() < 1e-9, "{rows:?}: chrf {c} vs {}", oracle::chrf_pp(&raw));
    }
}

#[test]
fn identity_and_disjoint() {
    let (same, _) = corpus(CORPORA[0]);
    assert_eq!(corpus_bleu(&same).unwrap().value, 100.0);
    assert_eq!(chrf_pp(&same).unwrap().value, 100.0);
    let (disjoint, _) = corpus(CORPORA[1]);
    assert_eq!(chrf_pp(&disjoint).unwrap().value, 0.0);
}

// Values from sacrebleu 2.6 (tokenize="none", effective order for BLEU).
// For chrF++ only a case where per-order precision equals recall is used:
// sacrebleu averages precision and recall before taking F, which differs
// from the mean of per-order F-scores elsewhere.
#[test]
fn agrees_with_sacrebleu() {
    let bleu = |h: &str, r: &str| corpus_bleu(&[SentencePair::from_text(h, r)]).unwrap().value;
    assert!((bleu("the the the the", "the cat") - 15.97357760615681).abs() < 1e-9);
    assert!((bleu("a b c d", "a b c d e f") - 60.653065971263366).abs() < 1e-9);
    assert_eq!(bleu("a b", "a b"), 100.0);
    let two = pair_lines(&["the cat sat on the mat", "a dog"], &["the cat is on the mat", "the dog"]).unwrap();
    assert!((corpus_bleu(&two).unwrap().value - 35.355339059327385).abs() < 1e-9);
    let chrf = |h: &str, r: &str| chrf_pp(&[SentencePair::from_text(h, r)]).unwrap().value;
    assert!((chrf("abc", "abd") - 29.166666666666664).abs() < 1e-9);
}

#[test]
fn brevity_penalty_by_hand() {
    let s = corpus_bleu(&[SentencePair::from_text("a b c d", "a b c d e f")]).unwrap();
    assert_eq!(s.components, vec![1.0; 4]);
    let bp = (1.0f64 - 6.0 / 4.0).exp();
    assert!((s.brevity_penalty.unwrap() - bp).abs() < 1e-15);
    assert!((s.value - 100.0 * bp).abs() < 1e-12);
}

#[test]
fn normalization() {
    assert_eq!(normalize_output("The Cat, sat."), ["the", "cat", ",", "sat", "."]);
    assert_eq!(normalize_output("  "), Vec::<String>::new());
}

fn sentence() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "ab", "ba", "."]), 1..7)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn pairs() -> impl Strategy<Value = Vec<(Vec<String>, Vec<String>)>> {
    prop::collection::vec((sentence(), sentence()), 1..5)
}

fn to_pairs(raw: &[(Vec<String>, Vec<String>)]) -> Vec<SentencePair> {
    raw.iter().map(|(h, r)| SentencePair::new(h.clone(), r.clone())).collect()
}

proptest! {
    #[test]
    fn random_corpora_match_oracles(raw in pairs()) {
        let p = to_pairs(&raw);
        prop_assert!((corpus_bleu(&p).unwrap().value - oracle::bleu(&raw)).abs() < 1e-9);
        prop_assert!((chrf_pp(&p).unwrap().value - oracle::chrf_pp(&raw)).abs() < 1e-9);
    }

    #[test]
    fn scores_in_range_and_permutation_invariant(raw in pairs(), rot in 0usize..5) {
        let p = to_pairs(&raw);
        let mut q = p.clone();
        q.rotate_left(rot % p.len());
        let (b, c) = (corpus_bleu(&p).unwrap().value, chrf_pp(&p).unwrap().value);
        prop_assert!((0.0..=100.0).contains(&b) && (0.0..=100.0).contains(&c));
        prop_assert!((b - corpus_bleu(&q).unwrap().value).abs() < 1e-9);
        prop_assert!((c - chrf_pp(&q).unwrap().value).abs() < 1e-9);
    }

    #[test]
    fn self_score_is_100(s in sentence()) {
        let p = [SentencePair::new(s.clone(), s)];
        prop_assert_eq!(corpus_bleu(&p).unwrap().value, 100.0);
        prop_assert_eq!(chrf_pp(&p).unwrap().value, 100.0);
    }

    // Replacing a token of a perfect hypothesis with an unseen one never
    // raises either score.
    #[test]
    fn corruption_never_helps(s in sentence(), at in 0usize..7) {
        let mut bad = s.clone();
        let i = at % bad.len();
        bad[i] = "zz".to_string();
        let good = [SentencePair::new(s.clone(), s.clone())];
        let worse = [SentencePair::new(bad, s)];
        prop_assert!(corpus_bleu(&worse).unwrap().value <= corpus_bleu(&good).unwrap().value);
        prop_assert!(chrf_pp(&worse).unwrap().value <= chrf_pp(&good).unwrap().value);
    }
}
