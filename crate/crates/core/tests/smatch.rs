mod common;

use amrtext::graph::parse_penman;
use amrtext::smatch::{extract_triples, matched_count, smatch_bruteforce, smatch_hillclimb, SmatchError};
use common::{perturb, random_graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hillclimb_finds_the_optimum_on_small_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..300 {
        let gold = random_graph(&mut rng, 6);
        let pred = if i % 2 == 0 { perturb(&mut rng, &gold) } else { random_graph(&mut rng, 6) };
        let hill = smatch_hillclimb(&gold, &pred, 8, 0).unwrap();
        let exact = smatch_bruteforce(&gold, &pred).unwrap();
        assert_eq!(hill.f1, exact.f1, "pair {i}\n{gold}\n{pred}");
        let counted = matched_count(&extract_triples(&gold), &extract_triples(&pred), &hill.best_mapping).unwrap();
        assert_eq!(counted, hill.matched);
    }
}

#[test]
fn inverse_roles_score_like_forward_roles() {
    let a = parse_penman("(w / want-01 :ARG0 (b / boy))").unwrap();
    let b = parse_penman("(w / want-01 :ARG0 (b / boy :ARG0-of w))").unwrap();
    let c = parse_penman("(x / want-01 :ARG0 (y / boy))").unwrap();
    assert_eq!(extract_triples(&a).len(), extract_triples(&c).len());
    assert_eq!(smatch_hillclimb(&a, &c, 2, 0).unwrap().f1, 1.0);
    // The duplicated edge is a second copy of the same triple.
    assert!(smatch_hillclimb(&a, &b, 2, 0).unwrap().f1 < 1.0);
}

#[test]
fn oracle_refuses_large_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let big = loop {
        let g = random_graph(&mut rng, 12);
        if g.variable_count() > 8 {
            break g;
        }
    };
    assert!(matches!(smatch_bruteforce(&big, &big), Err(SmatchError::TooLarge(_))));
    assert_eq!(smatch_hillclimb(&big, &big, 1, 0).unwrap().f1, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renaming_scores_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 10);
        let renamed = g.rename_variables(|v| format!("q{v}"));
        prop_assert_eq!(smatch_hillclimb(&g, &renamed, 1, seed).unwrap().f1, 1.0);
    }

    #[test]
    fn hillclimb_never_beats_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold = random_graph(&mut rng, 6);
        let pred = perturb(&mut rng, &gold);
        let exact = smatch_bruteforce(&gold, &pred).unwrap();
        for restarts in [1, 2, 4] {
            prop_assert!(smatch_hillclimb(&gold, &pred, restarts, seed).unwrap().matched <= exact.matched);
        }
    }

    #[test]
    fn more_restarts_never_hurt(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold = random_graph(&mut rng, 9);
        let pred = random_graph(&mut rng, 9);
        let mut last = 0;
        for restarts in [1, 2, 4, 8] {
            let m = smatch_hillclimb(&gold, &pred, restarts, seed).unwrap().matched;
            prop_assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn score_is_symmetric_in_f1(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_graph(&mut rng, 5);
        let b = perturb(&mut rng, &a);
        let ab = smatch_bruteforce(&a, &b).unwrap();
        let ba = smatch_bruteforce(&b, &a).unwrap();
        prop_assert_eq!(ab.matched, ba.matched);
        prop_assert!((ab.f1 - ba.f1).abs() < 1e-12);
    }
}
