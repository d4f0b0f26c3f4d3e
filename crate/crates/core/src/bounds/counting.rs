//! Counting results: search-space sizes, evaluation budgets and the number
//! of orderings saved by canonical leaf keys.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exact::{ExactValue, Scale, Score};

/// `n! / (n − k)!`; zero when `k > n`.
pub fn permutations(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
    }
    acc
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Cumulative number of trees of depth `1..=d` over `p` features.
///
/// Depth `d_t` contributes `p · Π_t C(2^{n_{t-1}}, n_t) (p − t)^{n_t}` summed
/// over `n_t = 1..=2^{n_{t-1}}` with `n_0 = 1`, evaluated literally.
pub fn count_trees(p: u64, d: u64) -> Result<BigUint> {
    if p == 0 || d == 0 {
        return Err(Error::Usage("count_trees needs p >= 1 and d >= 1".into()));
    }
    let mut total = BigUint::zero();
    for dt in 1..=d {
        total += BigUint::from(p) * level_sum(p, 1, dt, 1)?;
    }
    Ok(total)
}

fn level_sum(p: u64, t: u64, dt: u64, prev: u64) -> Result<BigUint> {
    if t >= dt {
        return Ok(BigUint::one());
    }
    if prev >= 32 {
        return Err(Error::Resource(format!(
            "tree count at depth {dt} is too large to enumerate"
        )));
    }
    let slots = 1u64 << prev;
    let avail = BigUint::from(p.saturating_sub(t));
    let mut total = BigUint::zero();
    for n in 1..=slots {
        let ways = binomial(slots, n) * avail.pow(n as u32);
        if ways.is_zero() {
            continue;
        }
        total += ways * level_sum(p, t + 1, dt, n)?;
    }
    Ok(total)
}

/// `Σ_{k=1}^{K} P(M, k) − C(M, k)`.
pub fn symmetry_savings(m: u64, k: u64) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::Usage("symmetry_savings needs K >= 1".into()));
    }
    let mut total = BigUint::zero();
    for i in 1..=k {
        total += permutations(m, i) - binomial(m, i);
    }
    Ok(total)
}

fn three_pow(m: usize) -> BigUint {
    BigUint::from(3u32).pow(m as u32)
}

fn check_lambda(lambda: ExactValue) -> Result<()> {
    if lambda.is_positive() {
        Ok(())
    } else {
        Err(Error::Usage(format!("lambda must be > 0, got {lambda}")))
    }
}

fn apriori_k(lambda: ExactValue, m: usize) -> Result<u64> {
    super::max_leaves_apriori(lambda, m)
}

/// `Σ_{k=0}^{K} P(3^M, k)` with `K = min(⌊1/2λ⌋, 2^M)`.
pub fn total_evaluations_bound_exact(lambda: ExactValue, m: usize) -> Result<BigUint> {
    check_lambda(lambda)?;
    let k = apriori_k(lambda, m)?;
    let t = three_pow(m);
    let mut term = BigUint::one();
    let mut total = BigUint::one();
    let mut i = BigUint::zero();
    for _ in 0..k {
        if i >= t {
            break;
        }
        term *= &t - &i;
        total += &term;
        i += 1u32;
    }
    Ok(total)
}

/// `⌊log10⌋` of [`total_evaluations_bound_exact`], computed with log-gamma.
pub fn total_evaluations_bound_log10(lambda: ExactValue, m: usize) -> Result<i64> {
    check_lambda(lambda)?;
    let k = apriori_k(lambda, m)?;
    let t = 3f64.powi(m as i32);
    Ok(floor_log10_of_ln(ln_sum_perms(t, k as f64)))
}

/// One queue entry for the remaining-evaluation bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemainingEntry {
    pub lower_bound: ExactValue,
    /// Number of leaves already fixed (`L`).
    pub leaf_count: u64,
}

fn remaining_f(best: ExactValue, b: ExactValue, lambda: ExactValue) -> i128 {
    (best - b).checked_div(&lambda).expect("lambda > 0").floor()
}

/// `Γ = Σ_entries Σ_{k=0}^{f} P(3^M − L, k)` with `f = min(⌊(best − b)/λ⌋, 3^M − L)`.
pub fn remaining_evaluations_exact(
    best: ExactValue,
    queue: &[RemainingEntry],
    lambda: ExactValue,
    m: usize,
) -> Result<BigUint> {
    check_lambda(lambda)?;
    let three = three_pow(m);
    let mut total = BigUint::zero();
    for e in queue {
        let f = remaining_f(best, e.lower_bound, lambda);
        if f < 0 {
            continue;
        }
        let l = BigUint::from(e.leaf_count);
        if l > three {
            continue;
        }
        let t = &three - l;
        let mut term = BigUint::one();
        total += &term;
        let mut i = BigUint::zero();
        let f = BigUint::from(f as u128).min(t.clone());
        while i < f {
            term *= &t - &i;
            total += &term;
            i += 1u32;
        }
    }
    Ok(total)
}

/// `⌊log10 Γ⌋`, or `None` when `Γ = 0` (nothing remains).
pub fn remaining_evaluations_log10(
    best: ExactValue,
    queue: &[RemainingEntry],
    lambda: ExactValue,
    m: usize,
) -> Result<Option<i64>> {
    check_lambda(lambda)?;
    let scale_free: Vec<(i128, u64, u64)> = queue
        .iter()
        .map(|e| (remaining_f(best, e.lower_bound, lambda), e.leaf_count, 1))
        .collect();
    Ok(log10_from_groups(&scale_free, m))
}

/// Same bound as [`remaining_evaluations_log10`] over entries grouped as
/// `(lower bound, L, multiplicity)` in score units.
pub(crate) fn remaining_log10_grouped(
    best: Score,
    groups: impl Iterator<Item = (Score, u64, u64)>,
    scale: &Scale,
    m: usize,
) -> Option<i64> {
    let entries: Vec<(i128, u64, u64)> = groups
        .map(|(b, l, count)| {
            let f = scale.floor_div_lambda(best - b).unwrap_or(i128::MAX);
            (f, l, count)
        })
        .collect();
    log10_from_groups(&entries, m)
}

fn log10_from_groups(entries: &[(i128, u64, u64)], m: usize) -> Option<i64> {
    let three = 3f64.powi(m as i32);
    let mut terms = Vec::with_capacity(entries.len());
    for &(f, l, count) in entries {
        if f < 0 || count == 0 || (l as f64) > three {
            continue;
        }
        let t = three - l as f64;
        let f = (f as f64).min(t);
        terms.push(ln_sum_perms(t, f) + (count as f64).ln());
    }
    if terms.is_empty() {
        return None;
    }
    Some(floor_log10_of_ln(log_sum_exp(&terms)))
}

/// `ln Σ_{k=0}^{f} P(t, k)` for `0 ≤ f ≤ t`.
fn ln_sum_perms(t: f64, f: f64) -> f64 {
    let f = f.min(t).max(0.0).floor();
    // Terms grow with k, so sum from the top and stop once they vanish.
    let ln_top = ln_gamma(t + 1.0) - ln_gamma(t - f + 1.0);
    let mut acc = 0.0f64; // Σ exp(ln_k − ln_top)
    let mut ln_k = ln_top;
    let mut k = f;
    loop {
        acc += (ln_k - ln_top).exp();
        if k == 0.0 {
            break;
        }
        // P(t, k−1) = P(t, k) / (t − k + 1)
        ln_k -= (t - k + 1.0).ln();
        k -= 1.0;
        if ln_k - ln_top < -50.0 {
            break;
        }
    }
    ln_top + acc.ln()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn floor_log10_of_ln(ln_v: f64) -> i64 {
    let v = ln_v / std::f64::consts::LN_10;
    // Guard against a hair below an exact power of ten.
    (v + 1e-12).floor() as i64
}

/// Exact `⌊log10 v⌋` for `v ≥ 1`.
pub fn floor_log10_exact(v: &BigUint) -> Option<i64> {
    if v.is_zero() {
        None
    } else {
        Some(v.to_str_radix(10).len() as i64 - 1)
    }
}
