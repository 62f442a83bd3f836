#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use amrtext::decode::{TableProvider, TokenId, Vocabulary};
use amrtext::graph::AmrGraph;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const CONCEPTS: &[&str] = &["dog", "cat", "see-01", "run-02", "big"];
const ROLES: &[&str] = &["ARG0", "ARG1", "mod"];
const CONSTANTS: &[&str] = &["-", "1", "\"Kim\""];

/// A random connected graph with `1..=max_vars` variables. Small label pools
/// make many alignments score the same, which is what stresses the search.
pub fn random_graph<R: Rng>(rng: &mut R, max_vars: usize) -> AmrGraph {
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut b = AmrGraph::builder(vars[0].clone());
    for v in &vars {
        b = b.instance(v.clone(), *CONCEPTS.choose(rng).unwrap());
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let role = *ROLES.choose(rng).unwrap();
        b = b.relation(vars[parent].clone(), role, vars[i].clone());
    }
    // Re-entrant edges, always pointing forward so the graph stays acyclic.
    for _ in 0..rng.gen_range(0..=n / 2) {
        if n < 2 {
            break;
        }
        let i = rng.gen_range(0..n - 1);
        let j = rng.gen_range(i + 1..n);
        b = b.relation(vars[i].clone(), *ROLES.choose(rng).unwrap(), vars[j].clone());
    }
    if rng.gen_bool(0.4) {
        let v = vars.choose(rng).unwrap().clone();
        b = b.attribute(v, "polarity", *CONSTANTS.choose(rng).unwrap());
    }
    b.build()
}

/// A copy of `g` under fresh names with some concepts and edges changed.
pub fn perturb<R: Rng>(rng: &mut R, g: &AmrGraph) -> AmrGraph {
    let mut b = AmrGraph::builder(format!("p{}", g.root()));
    for inst in g.instances() {
        let concept = if rng.gen_bool(0.25) {
            CONCEPTS.choose(rng).unwrap()
        } else {
            inst.concept.as_str()
        };
        b = b.instance(format!("p{}", inst.var), concept);
    }
    for rel in g.relations() {
        if rng.gen_bool(0.15) {
            continue;
        }
        let role = if rng.gen_bool(0.2) { ROLES.choose(rng).unwrap() } else { rel.role };
        b = b.relation(format!("p{}", rel.source), role, format!("p{}", rel.target));
    }
    for attr in g.attributes() {
        b = b.attribute(format!("p{}", attr.source), attr.role, attr.value);
    }
    b.build()
}

pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// A provider over `vocab_size` tokens (`t0`, `t1`, ..., last is `</s>`)
/// with an independent random distribution for every history up to
/// `max_length` tokens.
pub fn random_table_provider<R: Rng>(rng: &mut R, vocab_size: usize, max_length: usize) -> TableProvider {
    let mut tokens: Vec<String> = (0..vocab_size - 1).map(|i| format!("t{i}")).collect();
    tokens.push("</s>".to_string());
    let mut provider = TableProvider::new(Vocabulary::new(tokens).unwrap());
    let mut histories: Vec<Vec<TokenId>> = vec![vec![]];
    for _ in 0..max_length {
        let mut next = Vec::new();
        for h in &histories {
            provider.insert(h, random_distribution(rng, vocab_size)).unwrap();
            for t in 0..vocab_size as TokenId {
                let mut longer = h.clone();
                longer.push(t);
                next.push(longer);
            }
        }
        histories = next;
    }
    provider
}

/// A bigram provider over an explicit vocabulary.
pub fn random_bigram_provider<R: Rng>(rng: &mut R, tokens: &[String]) -> TableProvider {
    let n = tokens.len();
    let mut provider = TableProvider::new(Vocabulary::new(tokens.iter().cloned()).unwrap());
    provider.insert(&[], random_distribution(rng, n)).unwrap();
    for t in 0..n as TokenId {
        provider.insert(&[t], random_distribution(rng, n)).unwrap();
    }
    provider
}

/// Every sequence the beam search can return: strings ending in `end` of
/// length `<= max_length`, plus unfinished strings of exactly `max_length`.
pub fn all_outputs(vocab_size: usize, end: TokenId, max_length: usize) -> Vec<Vec<TokenId>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<TokenId>> = vec![vec![]];
    for depth in 1..=max_length {
        let mut next = Vec::new();
        for prefix in &frontier {
            for t in 0..vocab_size as TokenId {
                let mut s = prefix.clone();
                s.push(t);
                if t == end || depth == max_length {
                    out.push(s);
                } else {
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    out
}
