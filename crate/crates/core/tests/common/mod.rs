//! Seeded random instances small enough for the exhaustive oracle.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsetree::{Dataset, ExactValue};

pub const LAMBDAS: [(i128, i128); 3] = [(1, 100), (1, 20), (1, 10)];

pub fn lambdas() -> impl Iterator<Item = ExactValue> {
    LAMBDAS.iter().map(|&(n, d)| ExactValue::ratio(n, d))
}

/// Up to `max_n` samples over up to `max_m` features. Rows are drawn from
/// a small pool so duplicates (and conflicting labels on them) are common;
/// labels follow a random two-feature rule with some flips.
pub fn random_dataset(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Dataset {
    let m = rng.gen_range(1..=max_m);
    let n = rng.gen_range(1..=max_n);
    let pool_size = rng.gen_range(1..=n.min(1 << m));
    let pool: Vec<Vec<bool>> = (0..pool_size)
        .map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| pool[rng.gen_range(0..pool_size)].clone())
        .collect();
    let (f1, f2) = (rng.gen_range(0..m), rng.gen_range(0..m));
    let rule = rng.gen_range(0..3);
    let flip = rng.gen_range(0.0..0.3);
    let labels: Vec<bool> = rows
        .iter()
        .map(|r| {
            let y = match rule {
                0 => r[f1],
                1 => r[f1] && !r[f2],
                _ => r[f1] ^ r[f2],
            };
            y ^ rng.gen_bool(flip)
        })
        .collect();
    let names = (0..m).map(|j| format!("f{j}")).collect();
    Dataset::from_rows(names, "y", &rows, &labels).unwrap()
}

pub fn instances(count: usize, seed: u64) -> Vec<Dataset> {
    instances_within(count, seed, 40, 5)
}

pub fn instances_within(count: usize, seed: u64, max_n: usize, max_m: usize) -> Vec<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_dataset(&mut rng, max_n, max_m)).collect()
}
