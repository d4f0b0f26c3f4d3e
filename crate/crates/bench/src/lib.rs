//! Seeded synthetic datasets shared by the benchmarks and the CLI tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsetree::Dataset;

fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("f{j}")).collect()
}

/// Up to `max_n` samples over up to `max_m` features. Rows come from a
/// small pool, so duplicate rows with conflicting labels are common.
pub fn random_small(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Dataset {
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
    Dataset::from_rows(names(m), "y", &rows, &labels).unwrap()
}

/// `count` instances from [`random_small`] with `N ≤ 40`, `M ≤ 5`.
pub fn small_instances(count: usize, seed: u64) -> Vec<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_small(&mut rng, 40, 5)).collect()
}

/// `n` samples over `m` features drawn from `distinct` distinct rows. The
/// label is `(f0 ∧ f1) ∨ f2` with probability `1 − noise`, flipped
/// otherwise, independently per sample, so repeated rows disagree.
pub fn noisy_rule(seed: u64, n: usize, m: usize, distinct: usize, noise: f64) -> Dataset {
    assert!(m >= 3, "the rule reads three features");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Vec<bool>> = (0..distinct)
        .map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| pool[rng.gen_range(0..distinct)].clone())
        .collect();
    let labels: Vec<bool> = rows
        .iter()
        .map(|r| ((r[0] && r[1]) || r[2]) ^ rng.gen_bool(noise))
        .collect();
    Dataset::from_rows(names(m), "y", &rows, &labels).unwrap()
}

/// Uniform random rows and labels; hard for the search because nothing
/// can be pruned early.
pub fn uniform(seed: u64, n: usize, m: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dataset::from_rows(names(m), "y", &rows, &labels).unwrap()
}

/// The MONK's problem 1 concept over its full attribute space: 432 samples,
/// one-hot encoded into 17 binary features, labelled `a1 = a2 ∨ a5 = 1`.
/// This is the UCI `monks-1.test` set, which enumerates every attribute
/// combination.
pub fn monk1() -> Dataset {
    const SIZES: [usize; 6] = [3, 3, 2, 3, 4, 2];
    let mut names = Vec::new();
    for (a, &k) in SIZES.iter().enumerate() {
        for v in 1..=k {
            names.push(format!("a{}_{v}", a + 1));
        }
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut values = [1usize; 6];
    loop {
        let mut row = Vec::with_capacity(names.len());
        for (a, &k) in SIZES.iter().enumerate() {
            row.extend((1..=k).map(|v| values[a] == v));
        }
        rows.push(row);
        labels.push(values[0] == values[1] || values[4] == 1);
        // Odometer over the attribute values, last attribute fastest.
        let mut a = SIZES.len();
        loop {
            if a == 0 {
                return Dataset::from_rows(names, "class", &rows, &labels).unwrap();
            }
            a -= 1;
            values[a] += 1;
            if values[a] <= SIZES[a] {
                break;
            }
            values[a] = 1;
        }
    }
}
