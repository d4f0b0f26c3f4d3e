//! Leaf interning and tree deduplication.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::exact::Score;
use crate::leaf::{canonicalize, Clause, Leaf};
use crate::tree::TreeState;

/// Canonical clause sequence identifying a leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafKey(Vec<Clause>);

impl LeafKey {
    /// Canonicalizes `clauses`; rejects repeated features.
    pub fn new(clauses: &[Clause]) -> Result<LeafKey> {
        let mut v = clauses.to_vec();
        canonicalize(&mut v)?;
        Ok(LeafKey(v))
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.0
    }
}

/// One admissible split of a cached leaf.
#[derive(Debug)]
pub(crate) struct Split {
    pub feature: u32,
    /// Children for polarity `false` and `true`.
    pub children: [Arc<Leaf>; 2],
    /// Incremental accuracy is at least `λ`.
    pub gain_ok: bool,
}

/// Splits of one leaf that survive the per-leaf bounds.
#[derive(Debug, Default)]
pub(crate) struct SplitTable {
    pub splits: Vec<Split>,
}

/// Interns leaves by clause set so each capture vector is computed once.
/// Ids are dense and assigned in insertion order.
#[derive(Debug, Default)]
pub struct LeafCache {
    index: FxHashMap<LeafKey, u32>,
    leaves: Vec<Arc<Leaf>>,
    splits: Vec<Option<Arc<SplitTable>>>,
    hits: u64,
    builds: u64,
}

impl LeafCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached leaf for `key`, calling `build` only on a miss.
    pub fn intern(
        &mut self,
        key: &LeafKey,
        build: impl FnOnce() -> Result<Leaf>,
    ) -> Result<Arc<Leaf>> {
        if let Some(&id) = self.index.get(key) {
            self.hits += 1;
            return Ok(Arc::clone(&self.leaves[id as usize]));
        }
        let mut leaf = build()?;
        if leaf.clauses() != key.clauses() {
            return Err(Error::Usage(format!(
                "leaf built with clauses {:?} for key {:?}",
                leaf.clauses(),
                key.clauses()
            )));
        }
        self.builds += 1;
        let id = u32::try_from(self.leaves.len())
            .ok()
            .filter(|&id| id < u32::MAX >> 1)
            .ok_or_else(|| Error::Resource("too many distinct leaves".into()))?;
        leaf.id = id;
        let leaf = Arc::new(leaf);
        self.index.insert(key.clone(), id);
        self.leaves.push(Arc::clone(&leaf));
        self.splits.push(None);
        Ok(leaf)
    }

    pub fn get(&self, id: u32) -> Option<&Arc<Leaf>> {
        self.leaves.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    /// Number of leaves actually constructed.
    pub fn builds(&self) -> u64 {
        self.builds
    }

    pub(crate) fn split_table(&self, id: u32) -> Option<Arc<SplitTable>> {
        self.splits[id as usize].clone()
    }

    pub(crate) fn set_split_table(&mut self, id: u32, table: Arc<SplitTable>) {
        self.splits[id as usize] = Some(table);
    }
}

/// Identity of a tree up to leaf order: leaf ids with their splittable
/// flags in canonical order, followed by the must-split pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeKey(Box<[u32]>);

impl TreeKey {
    /// Requires every leaf to be interned in the same [`LeafCache`].
    pub fn of(tree: &TreeState) -> TreeKey {
        let mut v = Vec::with_capacity(tree.n_leaves() + 1 + 2 * tree.must_split().len());
        v.extend(
            tree.slots()
                .iter()
                .map(|s| (s.leaf.id() << 1) | u32::from(s.splittable)),
        );
        if !tree.must_split().is_empty() {
            v.push(u32::MAX);
            for &(a, b) in tree.must_split() {
                v.push(a);
                v.push(b);
            }
        }
        TreeKey(v.into_boxed_slice())
    }
}

/// Trees already evaluated, with their lower bounds for garbage collection.
#[derive(Debug, Default)]
pub struct TreeCache {
    seen: FxHashMap<TreeKey, Score>,
    hits: u64,
}

impl TreeCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `true` when `key` was seen before; otherwise records it.
    pub fn tree_seen_or_mark(&mut self, key: TreeKey, lower_bound: Score) -> bool {
        use std::collections::hash_map::Entry;
        match self.seen.entry(key) {
            Entry::Occupied(_) => {
                self.hits += 1;
                true
            }
            Entry::Vacant(e) => {
                e.insert(lower_bound);
                false
            }
        }
    }

    pub fn contains(&self, key: &TreeKey) -> bool {
        self.seen.contains_key(key)
    }

    /// Drops entries with `b + margin ≥ best`; returns how many were dropped.
    /// The margin is `λ` when lookahead is active and zero otherwise.
    pub fn garbage_collect(&mut self, best: Score, margin: Score) -> usize {
        let before = self.seen.len();
        self.seen.retain(|_, &mut b| b + margin < best);
        before - self.seen.len()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }
}
