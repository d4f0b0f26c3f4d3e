//! Certifiably optimal sparse decision trees over binary features.
//!
//! The objective of a tree is its training misclassification rate plus `λ`
//! per leaf. [`search::fit`] runs a best-first branch-and-bound over partial
//! trees and returns the optimum together with a certificate (empty queue)
//! or an optimality gap when a limit stops it early.

pub mod bitvec;
pub mod bounds;
pub mod cache;
pub mod dataset;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod leaf;
pub mod model;
pub mod oracle;
pub mod scheduler;
pub mod search;
pub mod tree;

pub use bitvec::BitVector;
pub use bounds::BoundToggles;
pub use dataset::{Dataset, EquivalenceIndex};
pub use error::{Error, Result};
pub use exact::{ExactValue, Scale, Score};
pub use leaf::{Clause, Leaf};
pub use model::Model;
pub use scheduler::Policy;
pub use search::{fit, SearchConfig, SearchResult, Stats, TraceRecord};
pub use tree::{LeafSlot, TreeState};

/// A dataset paired with its equivalence classes and objective scale.
#[derive(Debug)]
pub struct Problem<'a> {
    ds: &'a Dataset,
    eq: EquivalenceIndex,
    scale: Scale,
}

impl<'a> Problem<'a> {
    pub fn new(ds: &'a Dataset, lambda: ExactValue) -> Result<Self> {
        let scale = Scale::new(ds.n_samples(), lambda)?;
        Ok(Problem {
            ds,
            eq: EquivalenceIndex::build(ds),
            scale,
        })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn equivalence(&self) -> &EquivalenceIndex {
        &self.eq
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn lambda(&self) -> ExactValue {
        self.scale.lambda()
    }

    pub fn n(&self) -> usize {
        self.ds.n_samples()
    }

    pub fn m(&self) -> usize {
        self.ds.n_features()
    }

    /// Root-only tree: one splittable leaf capturing everything.
    pub fn root_tree(&self) -> TreeState {
        TreeState::root(std::sync::Arc::new(Leaf::root(self)), &self.scale)
    }
}
