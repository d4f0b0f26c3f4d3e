//! Priority queue of partial trees with pluggable exploration policies.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactValue, Scale};
use crate::tree::TreeState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Bfs,
    Dfs,
    LowerBound,
    Objective,
    Curiosity,
    Entropy,
    Gini,
}

impl Policy {
    pub const ALL: [Policy; 7] = [
        Policy::Bfs,
        Policy::Dfs,
        Policy::LowerBound,
        Policy::Objective,
        Policy::Curiosity,
        Policy::Entropy,
        Policy::Gini,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Bfs => "bfs",
            Policy::Dfs => "dfs",
            Policy::LowerBound => "lower_bound",
            Policy::Objective => "objective",
            Policy::Curiosity => "curiosity",
            Policy::Entropy => "entropy",
            Policy::Gini => "gini",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Policy> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown policy {s:?} (expected one of bfs, dfs, lower_bound, objective, curiosity, entropy, gini)"
                ))
            })
    }
}

/// Scheduling key; smaller is popped sooner. Keys from one policy share a
/// variant.
#[derive(Clone, Debug)]
pub enum PriorityKey {
    Int(i128),
    /// `num / den` with `den > 0`.
    Frac(i128, i128),
    Big(BigRational),
    Float(f64),
}

fn cmp_frac(a: i128, b: i128, c: i128, d: i128) -> Ordering {
    match (a.checked_mul(d), c.checked_mul(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => (BigInt::from(a) * BigInt::from(d)).cmp(&(BigInt::from(c) * BigInt::from(b))),
    }
}

impl Ord for PriorityKey {
    fn cmp(&self, other: &Self) -> Ordering {
        use PriorityKey::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Frac(a, b), Frac(c, d)) => cmp_frac(*a, *b, *c, *d),
            (Big(a), Big(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            _ => panic!("priority keys from different policies compared"),
        }
    }
}

impl PartialOrd for PriorityKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for PriorityKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PriorityKey {}

/// `b / supp(d_un)`, falling back to `b` when nothing is unchanged yet.
pub fn curiosity(b: ExactValue, unchanged_support: ExactValue) -> ExactValue {
    b.checked_div(&unchanged_support).unwrap_or(b)
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

/// Scheduling key of `tree` under `policy`.
pub fn priority(tree: &TreeState, policy: Policy, scale: &Scale) -> PriorityKey {
    match policy {
        Policy::Bfs => PriorityKey::Int(tree.h() as i128),
        Policy::Dfs => PriorityKey::Int(-(tree.h() as i128)),
        Policy::LowerBound => PriorityKey::Int(tree.lower_bound().0),
        Policy::Objective => PriorityKey::Int(tree.objective().0),
        Policy::Curiosity => {
            let b = tree.lower_bound().0;
            match tree.unchanged_captured() {
                0 => PriorityKey::Frac(b, 1),
                u => PriorityKey::Frac(b * scale.n() as i128, u as i128),
            }
        }
        Policy::Entropy => {
            let n = scale.n() as f64;
            let v = tree
                .slots()
                .iter()
                .filter(|s| s.splittable)
                .map(|s| {
                    let l = &s.leaf;
                    let p = l.n_ones() as f64 / l.n_captured() as f64;
                    l.n_captured() as f64 / n * binary_entropy(p)
                })
                .sum();
            PriorityKey::Float(v)
        }
        Policy::Gini => {
            // Σ (n_l/N)·2p(1−p) = (2/N) Σ ones·zeros / n_l; the constant is dropped.
            let mut acc = BigRational::zero();
            for s in tree.slots().iter().filter(|s| s.splittable) {
                let l = &s.leaf;
                let ones = l.n_ones() as i64;
                let zeros = (l.n_captured() - l.n_ones()) as i64;
                if ones > 0 && zeros > 0 {
                    acc += BigRational::new(
                        BigInt::from(ones * zeros),
                        BigInt::from(l.n_captured() as i64),
                    );
                }
            }
            PriorityKey::Big(acc)
        }
    }
}

struct Entry {
    key: PriorityKey,
    seq: u64,
    tree: TreeState,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Min-queue ordered by `(priority, insertion sequence)`.
pub struct WorkQueue {
    policy: Policy,
    heap: BinaryHeap<Reverse<Entry>>,
    next_seq: u64,
    max_len: usize,
}

impl WorkQueue {
    pub fn new(policy: Policy) -> Self {
        WorkQueue {
            policy,
            heap: BinaryHeap::new(),
            next_seq: 0,
            max_len: 0,
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// Pushes with an explicit key (used by tests and custom drivers).
    pub fn push_with_key(&mut self, mut tree: TreeState, key: PriorityKey) {
        let seq = self.next_seq;
        self.next_seq += 1;
        tree.generation = seq;
        self.heap.push(Reverse(Entry { key, seq, tree }));
        self.max_len = self.max_len.max(self.heap.len());
    }

    pub fn push(&mut self, tree: TreeState, scale: &Scale) {
        let key = priority(&tree, self.policy, scale);
        self.push_with_key(tree, key);
    }

    pub fn pop(&mut self) -> Option<TreeState> {
        self.heap.pop().map(|Reverse(e)| e.tree)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Largest size reached so far.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Queued trees in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = &TreeState> + '_ {
        self.heap.iter().map(|Reverse(e)| &e.tree)
    }

    /// Keeps only trees satisfying `keep`; returns how many were removed.
    pub fn retain(&mut self, mut keep: impl FnMut(&TreeState) -> bool) -> usize {
        let before = self.heap.len();
        self.heap.retain(|Reverse(e)| keep(&e.tree));
        before - self.heap.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::Problem;

    fn problem_tree() -> (Dataset, ExactValue) {
        let rows: Vec<Vec<bool>> = (0..100).map(|i| vec![i < 50]).collect();
        let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        (
            Dataset::from_rows(vec!["a".into()], "y", &rows, &labels).unwrap(),
            ExactValue::ratio(1, 100),
        )
    }

    #[test]
    fn heap_order_and_ties() {
        let (ds, lambda) = problem_tree();
        let p = Problem::new(&ds, lambda).unwrap();
        let mut q = WorkQueue::new(Policy::LowerBound);
        for k in [3, 1, 2] {
            q.push_with_key(p.root_tree(), PriorityKey::Int(k));
        }
        let order: Vec<u64> = std::iter::from_fn(|| q.pop()).map(|t| t.generation()).collect();
        assert_eq!(order, vec![1, 2, 0]);

        for _ in 0..3 {
            q.push_with_key(p.root_tree(), PriorityKey::Int(7));
        }
        let order: Vec<u64> = std::iter::from_fn(|| q.pop()).map(|t| t.generation()).collect();
        assert_eq!(order, vec![3, 4, 5]);
        assert_eq!(q.max_len(), 3);
    }

    #[test]
    fn curiosity_examples() {
        assert_eq!(
            curiosity(ExactValue::ratio(12, 100), ExactValue::ratio(6, 10)),
            ExactValue::ratio(1, 5)
        );
        assert_eq!(curiosity(ExactValue::ZERO, ExactValue::ZERO), ExactValue::ZERO);
    }

    #[test]
    fn entropy_of_balanced_root() {
        let (ds, lambda) = problem_tree();
        let p = Problem::new(&ds, lambda).unwrap();
        // One splittable leaf with p = 1/2 over all samples → 1.
        match priority(&p.root_tree(), Policy::Entropy, p.scale()) {
            PriorityKey::Float(v) => assert!((v - 1.0).abs() < 1e-12),
            other => panic!("unexpected key {other:?}"),
        }
        let half = Leaf::from_clauses(&p, &[crate::leaf::Clause::new(0, true)]).unwrap();
        let rest = Leaf::from_clauses(&p, &[crate::leaf::Clause::new(0, false)]).unwrap();
        let tree = TreeState::from_slots(
            vec![
                LeafSlot { leaf: std::sync::Arc::new(half), splittable: true },
                LeafSlot { leaf: std::sync::Arc::new(rest), splittable: false },
            ],
            Vec::new(),
            p.scale(),
        )
        .unwrap();
        // 50 of 100 samples splittable with p = 1/2 → (1/2)·1.
        match priority(&tree, Policy::Entropy, p.scale()) {
            PriorityKey::Float(v) => assert!((v - 0.5).abs() < 1e-12),
            other => panic!("unexpected key {other:?}"),
        }
    }

    use crate::leaf::Leaf;
    use crate::tree::LeafSlot;

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("random".parse::<Policy>().is_err());
    }

    #[test]
    fn fraction_compare_falls_back_to_big_ints() {
        let big = i128::MAX / 3;
        assert_eq!(cmp_frac(big, 7, big, 5), Ordering::Less);
        assert_eq!(cmp_frac(1, 3, 2, 6), Ordering::Equal);
    }
}
