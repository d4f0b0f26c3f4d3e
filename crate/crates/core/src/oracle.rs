//! Exhaustive optimizer for small instances, independent of every pruning
//! bound. It explores all trees over all features (a feature is never reused
//! along a path) by dynamic programming over clause sets: for each clause
//! set and each leaf budget `j` it keeps the fewest mistakes achievable with
//! exactly `j` leaves.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::leaf::Clause;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Largest tree considered; `None` means `min(⌊1/λ⌋, 2^M)`, which no
    /// optimum can exceed because the root-only objective is at most 1/2.
    pub max_leaves: Option<usize>,
    pub max_features: usize,
    /// Refuse instances whose estimated work exceeds this many steps.
    pub max_work: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_leaves: None,
            max_features: 12,
            max_work: 500_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub objective: ExactValue,
    /// Clause lists of one optimal tree's leaves.
    pub leaves: Vec<Vec<Clause>>,
    pub mistakes: usize,
}

const INF: u64 = u64::MAX;

struct Table {
    /// `err[j - 1]`: fewest mistakes with exactly `j` leaves.
    err: Vec<u64>,
    /// Split feature and left budget realizing `err[j - 1]` for `j ≥ 2`.
    choice: Vec<Option<(u32, u32)>>,
}

struct Solver<'a> {
    ds: &'a Dataset,
    max_leaves: usize,
    memo: FxHashMap<(u32, u32), Table>,
}

impl Solver<'_> {
    fn budget(&self, used: u32) -> usize {
        let free = self.ds.n_features() - used.count_ones() as usize;
        if free >= 63 {
            self.max_leaves
        } else {
            self.max_leaves.min(1usize << free)
        }
    }

    fn solve(&mut self, used: u32, vals: u32, capture: &BitVector) {
        if self.memo.contains_key(&(used, vals)) {
            return;
        }
        let n = capture.count_ones();
        let ones = capture.and_count(self.ds.labels()).expect("length N");
        let cap = self.budget(used);
        let mut err = vec![INF; cap];
        let mut choice = vec![None; cap];
        err[0] = ones.min(n - ones) as u64;
        if cap >= 2 {
            for f in 0..self.ds.n_features() {
                let bit = 1u32 << f;
                if used & bit != 0 {
                    continue;
                }
                let col = self.ds.column(f);
                let lo = capture.and_not(col).expect("length N");
                let hi = capture.and(col).expect("length N");
                let (lu, lv) = (used | bit, vals);
                let (hu, hv) = (used | bit, vals | bit);
                self.solve(lu, lv, &lo);
                self.solve(hu, hv, &hi);
                let left = &self.memo[&(lu, lv)].err;
                let right = &self.memo[&(hu, hv)].err;
                for (i, &el) in left.iter().enumerate() {
                    if el == INF {
                        continue;
                    }
                    for (k, &er) in right.iter().enumerate() {
                        if er == INF {
                            continue;
                        }
                        let j = i + k + 2;
                        if j > cap {
                            break;
                        }
                        if el + er < err[j - 1] {
                            err[j - 1] = el + er;
                            choice[j - 1] = Some((f as u32, (i + 1) as u32));
                        }
                    }
                }
            }
        }
        self.memo.insert((used, vals), Table { err, choice });
    }

    fn leaves(&self, used: u32, vals: u32, j: usize, out: &mut Vec<Vec<Clause>>) {
        let table = &self.memo[&(used, vals)];
        match table.choice[j - 1] {
            None => {
                let clauses = (0..self.ds.n_features())
                    .filter(|f| used & (1 << f) != 0)
                    .map(|f| Clause::new(f, vals & (1 << f) != 0))
                    .collect();
                out.push(clauses);
            }
            Some((f, jl)) => {
                let bit = 1u32 << f;
                self.leaves(used | bit, vals, jl as usize, out);
                self.leaves(used | bit, vals | bit, j - jl as usize, out);
            }
        }
    }
}

/// Estimated inner-loop steps: per clause set, features × budget².
fn work_estimate(m: usize, max_leaves: usize) -> u64 {
    let mut total: u64 = 0;
    let mut binom: u64 = 1;
    for d in 0..=m {
        let nodes = binom.saturating_mul(1u64 << d.min(63));
        let free = m - d;
        let cap = if free >= 63 {
            max_leaves as u64
        } else {
            (max_leaves as u64).min(1u64 << free)
        };
        let step = nodes
            .saturating_mul(free.max(1) as u64)
            .saturating_mul(cap.saturating_mul(cap));
        total = total.saturating_add(step);
        binom = binom.saturating_mul((m - d) as u64) / (d as u64 + 1);
    }
    total
}

/// Exact optimum of `mistakes/N + λ·H` (`H = 0` for the root-only tree).
pub fn exhaustive_optimum(
    ds: &Dataset,
    lambda: ExactValue,
    limits: &OracleLimits,
) -> Result<OracleResult> {
    if !lambda.is_positive() {
        return Err(Error::Usage(format!("lambda must be > 0, got {lambda}")));
    }
    let m = ds.n_features();
    if m > limits.max_features || m > 31 {
        return Err(Error::Resource(format!(
            "oracle limited to {} features, dataset has {m}",
            limits.max_features.min(31)
        )));
    }
    let n = ds.n_samples();
    let default_leaves = {
        let inv = ExactValue::integer(1)
            .checked_div(&lambda)
            .expect("lambda > 0")
            .floor()
            .max(1);
        let pow = if m >= 63 { i128::MAX } else { 1i128 << m };
        inv.min(pow) as usize
    };
    let max_leaves = limits.max_leaves.unwrap_or(default_leaves).max(1);
    let work = work_estimate(m, max_leaves);
    if work > limits.max_work {
        return Err(Error::Resource(format!(
            "oracle work estimate {work} exceeds the ceiling {}",
            limits.max_work
        )));
    }
    let mut solver = Solver {
        ds,
        max_leaves,
        memo: FxHashMap::default(),
    };
    solver.solve(0, 0, &BitVector::ones(n));
    let root = &solver.memo[&(0, 0)];
    let n_i = n as i128;
    let mut best = (ExactValue::ratio(root.err[0] as i128, n_i), 1usize);
    for (i, &e) in root.err.iter().enumerate().skip(1) {
        if e == INF {
            continue;
        }
        let j = i + 1;
        let obj = ExactValue::ratio(e as i128, n_i) + lambda.mul_int(j as i128);
        if obj < best.0 {
            best = (obj, j);
        }
    }
    let mut leaves = Vec::new();
    solver.leaves(0, 0, best.1, &mut leaves);
    Ok(OracleResult {
        objective: best.0,
        leaves,
        mistakes: root.err[best.1 - 1] as usize,
    })
}
