//! Tree states and the incremental objective / lower-bound arithmetic.
//!
//! A tree is a partition of the samples into leaves. Each leaf is either
//! *unchanged* (its error is locked into the lower bound) or *splittable*.
//! The leaf-count penalty uses `H = 0` for the root-only tree and the real
//! leaf count otherwise.

use std::sync::Arc;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::exact::{ExactValue, Scale, Score};
use crate::leaf::Leaf;
use crate::Problem;

#[derive(Clone, Debug)]
pub struct LeafSlot {
    pub leaf: Arc<Leaf>,
    pub splittable: bool,
}

#[derive(Clone, Debug)]
pub struct TreeState {
    slots: Vec<LeafSlot>,
    must_split: Vec<(u32, u32)>,
    h: u32,
    k: u32,
    lower_bound: Score,
    objective: Score,
    split_b0: Score,
    unchanged_captured: usize,
    pub(crate) generation: u64,
}

/// Leaf count charged by the sparsity penalty.
#[inline]
pub fn penalized_leaves(n_leaves: usize) -> u32 {
    if n_leaves <= 1 {
        0
    } else {
        n_leaves as u32
    }
}

impl TreeState {
    /// The root-only tree with its single leaf splittable.
    pub fn root(leaf: Arc<Leaf>, scale: &Scale) -> TreeState {
        let objective = leaf.mistake_units(scale);
        let split_b0 = scale.samples(leaf.b0_count());
        TreeState {
            slots: vec![LeafSlot {
                leaf,
                splittable: true,
            }],
            must_split: Vec::new(),
            h: 0,
            k: 0,
            lower_bound: Score::ZERO,
            objective,
            split_b0,
            unchanged_captured: 0,
            generation: 0,
        }
    }

    /// A tree whose leaves are all unchanged.
    pub fn terminal(leaves: Vec<Arc<Leaf>>, scale: &Scale) -> Result<TreeState> {
        let slots = leaves
            .into_iter()
            .map(|leaf| LeafSlot {
                leaf,
                splittable: false,
            })
            .collect();
        TreeState::from_slots(slots, Vec::new(), scale)
    }

    /// Computes every derived quantity from scratch and checks the partition.
    pub fn from_slots(
        mut slots: Vec<LeafSlot>,
        mut must_split: Vec<(u32, u32)>,
        scale: &Scale,
    ) -> Result<TreeState> {
        if slots.is_empty() {
            return Err(Error::Usage("a tree needs at least one leaf".into()));
        }
        slots.sort_by(|a, b| a.leaf.canonical_cmp(&b.leaf));
        check_partition(slots.iter().map(|s| s.leaf.as_ref()), scale.n())?;
        must_split.sort_unstable();
        let h = penalized_leaves(slots.len());
        let unchanged: Vec<&Leaf> = slots
            .iter()
            .filter(|s| !s.splittable)
            .map(|s| s.leaf.as_ref())
            .collect();
        let splittable: Vec<&Leaf> = slots
            .iter()
            .filter(|s| s.splittable)
            .map(|s| s.leaf.as_ref())
            .collect();
        let lower_bound = incremental_lower_bound(Score::ZERO, &unchanged, scale, h);
        let objective = incremental_objective(lower_bound, &splittable, scale);
        Ok(TreeState {
            k: unchanged.len() as u32,
            unchanged_captured: unchanged.iter().map(|l| l.n_captured()).sum(),
            split_b0: scale.samples(splittable.iter().map(|l| l.b0_count()).sum()),
            slots,
            must_split,
            h,
            lower_bound,
            objective,
            generation: 0,
        })
    }

    pub fn slots(&self) -> &[LeafSlot] {
        &self.slots
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Arc<Leaf>> + '_ {
        self.slots.iter().map(|s| &s.leaf)
    }

    pub fn n_leaves(&self) -> usize {
        self.slots.len()
    }

    /// Penalized leaf count (0 for the root-only tree).
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Number of unchanged leaves.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_splittable(&self) -> usize {
        self.slots.len() - self.k as usize
    }

    pub fn is_terminal(&self) -> bool {
        self.n_splittable() == 0
    }

    pub fn must_split(&self) -> &[(u32, u32)] {
        &self.must_split
    }

    pub fn lower_bound(&self) -> Score {
        self.lower_bound
    }

    pub fn objective(&self) -> Score {
        self.objective
    }

    /// Σ b0 over splittable leaves.
    pub fn split_b0(&self) -> Score {
        self.split_b0
    }

    pub fn unchanged_captured(&self) -> usize {
        self.unchanged_captured
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn lower_bound_value(&self, scale: &Scale) -> ExactValue {
        scale.to_exact(self.lower_bound)
    }

    pub fn objective_value(&self, scale: &Scale) -> ExactValue {
        scale.to_exact(self.objective)
    }

    /// `Σ mistakes / N + λ·H` over all leaves, from scratch.
    pub fn recompute_objective(&self, scale: &Scale) -> Score {
        let mistakes: usize = self.slots.iter().map(|s| s.leaf.mistakes()).sum();
        scale.samples(mistakes) + scale.leaves(self.h)
    }

    /// `Σ unchanged mistakes / N + λ·H`, from scratch.
    pub fn recompute_lower_bound(&self, scale: &Scale) -> Score {
        let mistakes: usize = self
            .slots
            .iter()
            .filter(|s| !s.splittable)
            .map(|s| s.leaf.mistakes())
            .sum();
        scale.samples(mistakes) + scale.leaves(self.h)
    }

    /// Samples correctly classified when every leaf predicts its majority label.
    pub fn n_correct(&self) -> usize {
        self.slots.iter().map(|s| s.leaf.n_correct()).sum()
    }

    /// Index of the first splittable leaf in canonical order.
    pub fn designated(&self) -> Option<usize> {
        self.slots.iter().position(|s| s.splittable)
    }

    pub(crate) fn partner_of(&self, leaf_id: u32) -> Option<u32> {
        self.must_split.iter().find_map(|&(a, b)| {
            if a == leaf_id {
                Some(b)
            } else if b == leaf_id {
                Some(a)
            } else {
                None
            }
        })
    }

    pub(crate) fn slot_of(&self, leaf_id: u32) -> Option<&LeafSlot> {
        self.slots.iter().find(|s| s.leaf.id == leaf_id)
    }

    /// Marks the splittable leaf at `idx` unchanged.
    pub(crate) fn retired(&self, idx: usize, lower_bound: Score, scale: &Scale) -> TreeState {
        let mut slots = self.slots.clone();
        let leaf = &slots[idx].leaf;
        debug_assert!(slots[idx].splittable);
        let split_b0 = self.split_b0 - scale.samples(leaf.b0_count());
        let unchanged_captured = self.unchanged_captured + leaf.n_captured();
        slots[idx].splittable = false;
        TreeState {
            slots,
            must_split: self.must_split.clone(),
            h: self.h,
            k: self.k + 1,
            lower_bound,
            objective: self.objective,
            split_b0,
            unchanged_captured,
            generation: 0,
        }
    }

    /// Replaces the leaf at `idx` by its two children.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn split(
        &self,
        idx: usize,
        children: [(&Arc<Leaf>, bool); 2],
        mark_pair: bool,
        lower_bound: Score,
        objective: Score,
        scale: &Scale,
    ) -> TreeState {
        let parent = &self.slots[idx];
        let parent_id = parent.leaf.id;
        let mut split_b0 = self.split_b0;
        if parent.splittable {
            split_b0 = split_b0 - scale.samples(parent.leaf.b0_count());
        }
        let mut k = self.k;
        let mut unchanged_captured = self.unchanged_captured;
        let mut slots = Vec::with_capacity(self.slots.len() + 1);
        slots.extend(self.slots[..idx].iter().cloned());
        slots.extend(self.slots[idx + 1..].iter().cloned());
        for (leaf, splittable) in children {
            if splittable {
                split_b0 += scale.samples(leaf.b0_count());
            } else {
                k += 1;
                unchanged_captured += leaf.n_captured();
            }
            let pos = slots.partition_point(|s| s.leaf.canonical_cmp(leaf).is_lt());
            slots.insert(
                pos,
                LeafSlot {
                    leaf: Arc::clone(leaf),
                    splittable,
                },
            );
        }
        let mut must_split: Vec<(u32, u32)> = self
            .must_split
            .iter()
            .copied()
            .filter(|&(a, b)| a != parent_id && b != parent_id)
            .collect();
        if mark_pair {
            let (a, b) = (children[0].0.id, children[1].0.id);
            must_split.push((a.min(b), a.max(b)));
            must_split.sort_unstable();
        }
        TreeState {
            slots,
            must_split,
            h: penalized_leaves(self.slots.len() + 1),
            k,
            lower_bound,
            objective,
            split_b0,
            unchanged_captured,
            generation: 0,
        }
    }

    /// Child with the splittable leaf at `idx` marked unchanged, computed
    /// incrementally.
    pub fn retire_leaf(&self, idx: usize, scale: &Scale) -> Result<TreeState> {
        let slot = self.splittable_slot(idx)?;
        let b = incremental_lower_bound(self.lower_bound, &[slot.leaf.as_ref()], scale, 0);
        Ok(self.retired(idx, b, scale))
    }

    /// Child with the splittable leaf at `idx` replaced by its two children
    /// on `feature`, computed incrementally. `flags[p]` makes the child with
    /// polarity `p` splittable.
    pub fn split_leaf(
        &self,
        problem: &Problem<'_>,
        idx: usize,
        feature: usize,
        flags: [bool; 2],
    ) -> Result<TreeState> {
        let scale = problem.scale();
        let leaf = &self.splittable_slot(idx)?.leaf;
        let children = [
            Arc::new(leaf.child(problem, feature, false)?),
            Arc::new(leaf.child(problem, feature, true)?),
        ];
        let delta_h = if self.slots.len() == 1 { 2 } else { 1 };
        let unchanged: Vec<&Leaf> = children
            .iter()
            .zip(flags)
            .filter(|(_, s)| !s)
            .map(|(c, _)| c.as_ref())
            .collect();
        let b = incremental_lower_bound(self.lower_bound, &unchanged, scale, delta_h);
        let splittable: Vec<&Leaf> = self
            .slots
            .iter()
            .enumerate()
            .filter(|&(i, s)| i != idx && s.splittable)
            .map(|(_, s)| s.leaf.as_ref())
            .chain(
                children
                    .iter()
                    .zip(flags)
                    .filter(|(_, s)| *s)
                    .map(|(c, _)| c.as_ref()),
            )
            .collect();
        let r = incremental_objective(b, &splittable, scale);
        Ok(self.split(
            idx,
            [(&children[0], flags[0]), (&children[1], flags[1])],
            false,
            b,
            r,
            scale,
        ))
    }

    fn splittable_slot(&self, idx: usize) -> Result<&LeafSlot> {
        match self.slots.get(idx) {
            Some(s) if s.splittable => Ok(s),
            Some(_) => Err(Error::Usage(format!("leaf {idx} is not splittable"))),
            None => Err(Error::Usage(format!(
                "leaf index {idx} out of range ({} leaves)",
                self.slots.len()
            ))),
        }
    }

    /// Checks the stored quantities against a from-scratch recomputation.
    pub fn check_invariants(&self, scale: &Scale) -> Result<()> {
        check_partition(self.slots.iter().map(|s| s.leaf.as_ref()), scale.n())?;
        let bad = |what: &str| Err(Error::Invariant(format!("tree {what}")));
        if self.lower_bound != self.recompute_lower_bound(scale) {
            return bad("lower bound");
        }
        if self.objective != self.recompute_objective(scale) {
            return bad("objective");
        }
        if self.h != penalized_leaves(self.slots.len()) {
            return bad("leaf count");
        }
        if self.lower_bound > self.objective {
            return bad("lower bound exceeds objective");
        }
        if !self
            .slots
            .windows(2)
            .all(|w| w[0].leaf.canonical_cmp(&w[1].leaf).is_lt())
        {
            return bad("canonical leaf order");
        }
        Ok(())
    }
}

/// Leaves must be pairwise disjoint and cover all `n` samples.
pub fn check_partition<'a>(leaves: impl Iterator<Item = &'a Leaf>, n: usize) -> Result<()> {
    let mut union = BitVector::zeros(n);
    let mut total = 0;
    for leaf in leaves {
        if !union.is_disjoint(leaf.capture())? {
            return Err(Error::Usage("leaf captures overlap".into()));
        }
        union = union.or(leaf.capture())?;
        total += leaf.n_captured();
    }
    if total != n {
        return Err(Error::Usage(format!(
            "leaves capture {total} of {n} samples"
        )));
    }
    Ok(())
}

/// `parent_b + λ·ΔH + Σ mistakes(newly unchanged) / N`.
pub fn incremental_lower_bound(
    parent_b: Score,
    newly_unchanged: &[&Leaf],
    scale: &Scale,
    delta_h: u32,
) -> Score {
    let mistakes: usize = newly_unchanged.iter().map(|l| l.mistakes()).sum();
    parent_b + scale.leaves(delta_h) + scale.samples(mistakes)
}

/// `child_b + Σ mistakes(splittable) / N`.
pub fn incremental_objective(child_b: Score, splittable: &[&Leaf], scale: &Scale) -> Score {
    let mistakes: usize = splittable.iter().map(|l| l.mistakes()).sum();
    child_b + scale.samples(mistakes)
}
