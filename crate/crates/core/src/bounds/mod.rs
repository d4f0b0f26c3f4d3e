//! Pruning predicates and leaf-count bounds.
//!
//! Every predicate here is stated on exact values; the search evaluates the
//! same inequalities on integer [`Score`](crate::exact::Score) units.

mod counting;

pub use counting::{
    count_trees, floor_log10_exact, permutations, remaining_evaluations_exact, remaining_evaluations_log10,
    symmetry_savings, total_evaluations_bound_exact, total_evaluations_bound_log10,
    RemainingEntry,
};
pub(crate) use counting::remaining_log10_grouped;

use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::leaf::Leaf;
use crate::tree::TreeState;

/// Optional bounds that can be switched off for ablation. The hierarchical
/// lower bound is not listed because it cannot be disabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundToggles {
    pub lookahead: bool,
    pub node_support: bool,
    pub incremental_accuracy: bool,
    pub leaf_accuracy: bool,
    pub equivalent_points: bool,
    pub permutation_cache: bool,
    pub similar_support: bool,
}

impl Default for BoundToggles {
    fn default() -> Self {
        BoundToggles {
            lookahead: true,
            node_support: true,
            incremental_accuracy: true,
            leaf_accuracy: true,
            equivalent_points: true,
            permutation_cache: true,
            similar_support: false,
        }
    }
}

impl BoundToggles {
    /// Only the hierarchical lower bound.
    pub fn hierarchical_only() -> Self {
        BoundToggles {
            lookahead: false,
            node_support: false,
            incremental_accuracy: false,
            leaf_accuracy: false,
            equivalent_points: false,
            permutation_cache: false,
            similar_support: false,
        }
    }

    pub const fn hierarchical(&self) -> bool {
        true
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Usage("N must be positive".into()))
    } else {
        Ok(())
    }
}

fn check_lambda_positive(lambda: ExactValue) -> Result<()> {
    if lambda.is_positive() {
        Ok(())
    } else {
        Err(Error::Usage(format!("lambda must be > 0, got {lambda}")))
    }
}

fn frac(k: usize, n: usize) -> ExactValue {
    ExactValue::ratio(k as i128, n as i128)
}

/// A leaf whose support is below `2λ` is never split.
pub fn leaf_is_dead(n_captured: usize, lambda: ExactValue, n: usize) -> Result<bool> {
    check_n(n)?;
    Ok(frac(n_captured, n) < lambda.mul_int(2))
}

/// A child leaf is admissible when it classifies at least `λN` samples correctly.
pub fn child_accuracy_admissible(n_correct: usize, lambda: ExactValue, n: usize) -> Result<bool> {
    check_n(n)?;
    Ok(frac(n_correct, n) >= lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitGain {
    /// Incremental fraction of correctly classified samples.
    pub gain: ExactValue,
    /// `gain < λ`: at least one of the two children must be split again.
    pub must_split_further: bool,
}

/// Incremental accuracy of splitting `parent` into `left` and `right`.
pub fn split_gain(
    parent: &Leaf,
    left: &Leaf,
    right: &Leaf,
    n: usize,
    lambda: ExactValue,
) -> Result<SplitGain> {
    check_n(n)?;
    let union = left.capture().or(right.capture())?;
    if !left.capture().is_disjoint(right.capture())? || &union != parent.capture() {
        return Err(Error::Usage(
            "children do not partition the parent's capture".into(),
        ));
    }
    let delta = (left.n_correct() + right.n_correct()) as i128 - parent.n_correct() as i128;
    let gain = ExactValue::ratio(delta, n as i128);
    Ok(SplitGain {
        gain,
        must_split_further: gain < lambda,
    })
}

/// One-step lookahead: no child of a tree with `b + λ ≥ best` can improve.
pub fn lookahead_prunes(b: ExactValue, lambda: ExactValue, best: ExactValue) -> bool {
    b + lambda >= best
}

/// `b_0`: minority mass of equivalent points captured by splittable leaves.
pub fn equivalent_points_floor(tree: &TreeState, n: usize) -> Result<ExactValue> {
    check_n(n)?;
    let count: usize = tree
        .slots()
        .iter()
        .filter(|s| s.splittable)
        .map(|s| s.leaf.b0_count())
        .sum();
    Ok(frac(count, n))
}

fn pow2_saturating(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        1u64 << m
    }
}

fn clamp_floor(v: i128, cap: u64) -> u64 {
    if v <= 0 {
        0
    } else {
        (v.min(u64::MAX as i128) as u64).min(cap)
    }
}

/// `min(⌊1/(2λ)⌋, 2^M)`.
pub fn max_leaves_apriori(lambda: ExactValue, m: usize) -> Result<u64> {
    check_lambda_positive(lambda)?;
    let v = ExactValue::integer(1)
        .checked_div(&lambda.mul_int(2))
        .expect("lambda > 0");
    Ok(clamp_floor(v.floor(), pow2_saturating(m)))
}

/// `min(⌊best/λ⌋, 2^M)`.
pub fn max_leaves_current(best: ExactValue, lambda: ExactValue, m: usize) -> Result<u64> {
    check_lambda_positive(lambda)?;
    let v = best.checked_div(&lambda).expect("lambda > 0");
    Ok(clamp_floor(v.floor(), pow2_saturating(m)))
}

/// Strict cap `min(H + ⌊(best − b)/λ⌋, 2^M)` on the leaf count of any child
/// worth extending.
pub fn max_leaves_parent_specific(
    parent_b: ExactValue,
    parent_h: u32,
    best: ExactValue,
    lambda: ExactValue,
    m: usize,
) -> Result<u64> {
    check_lambda_positive(lambda)?;
    let v = (best - parent_b).checked_div(&lambda).expect("lambda > 0");
    Ok(clamp_floor(
        parent_h as i128 + v.floor(),
        pow2_saturating(m),
    ))
}

/// `ω`: normalized support of the samples captured by exactly one of two
/// subtrees that differ in a single split feature.
pub fn similar_support_omega(a: &BitVector, b: &BitVector, n: usize) -> Result<ExactValue> {
    check_n(n)?;
    let diff = a.xor(b)?;
    Ok(frac(diff.count_ones(), n))
}

#[cfg(test)]
mod tests;
