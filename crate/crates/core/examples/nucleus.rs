//! The nucleus of a distribution and how often each token is sampled.
//!
//! cargo run --example nucleus

use amrtext::decode::{nucleus_set, sample_nucleus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let dist = [0.05, 0.4, 0.3, 0.15, 0.1];
    for mass in [0.01, 0.5, 0.7, 0.9, 1.0] {
        let nucleus = nucleus_set(&dist, mass);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[sample_nucleus(&dist, mass, &mut rng) as usize] += 1;
        }
        println!("p = {mass:<4} nucleus {nucleus:?}  counts {counts:?}");
    }
}
