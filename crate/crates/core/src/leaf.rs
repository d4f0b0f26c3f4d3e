//! Leaves: conjunctions of feature literals with cached capture statistics.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::exact::{ExactValue, Scale, Score};
use crate::Problem;

/// The literal `feature == polarity`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub feature: u32,
    pub polarity: bool,
}

impl Clause {
    pub fn new(feature: usize, polarity: bool) -> Self {
        Clause {
            feature: feature as u32,
            polarity,
        }
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}={}", self.feature, u8::from(self.polarity))
    }
}

/// Sorts clauses by feature and rejects repeated features.
pub fn canonicalize(clauses: &mut [Clause]) -> Result<()> {
    clauses.sort_unstable();
    if let Some(w) = clauses.windows(2).find(|w| w[0].feature == w[1].feature) {
        return Err(Error::Usage(format!(
            "feature {} appears twice in one leaf",
            w[0].feature
        )));
    }
    Ok(())
}

/// Id given to leaves that were not interned by a leaf cache.
pub const UNINTERNED: u32 = u32::MAX;

/// Immutable leaf value. Predictions tie toward label 0.
#[derive(Clone, PartialEq, Eq)]
pub struct Leaf {
    pub(crate) id: u32,
    clauses: Vec<Clause>,
    capture: BitVector,
    n_captured: usize,
    n_ones: usize,
    b0_count: usize,
    dead: bool,
    dead_features: BitVector,
}

impl Leaf {
    /// The leaf with no clauses; it captures every sample.
    pub fn root(problem: &Problem<'_>) -> Leaf {
        let n = problem.dataset().n_samples();
        Leaf::from_capture(
            problem,
            Vec::new(),
            BitVector::ones(n),
            BitVector::zeros(problem.dataset().n_features()),
        )
    }

    /// Builds a leaf from an arbitrary clause list (order-insensitive).
    pub fn from_clauses(problem: &Problem<'_>, clauses: &[Clause]) -> Result<Leaf> {
        let ds = problem.dataset();
        let mut clauses = clauses.to_vec();
        canonicalize(&mut clauses)?;
        let mut capture = BitVector::ones(ds.n_samples());
        for c in &clauses {
            let col = ds.literal_column(c.feature as usize, c.polarity)?;
            capture = capture.and(&col)?;
        }
        Ok(Leaf::from_capture(
            problem,
            clauses,
            capture,
            BitVector::zeros(ds.n_features()),
        ))
    }

    /// Extends this leaf by one literal; dead features are inherited.
    pub fn child(&self, problem: &Problem<'_>, feature: usize, polarity: bool) -> Result<Leaf> {
        self.child_with_dead(problem, feature, polarity, self.dead_features.clone())
    }

    pub(crate) fn child_with_dead(
        &self,
        problem: &Problem<'_>,
        feature: usize,
        polarity: bool,
        dead_features: BitVector,
    ) -> Result<Leaf> {
        let ds = problem.dataset();
        if feature >= ds.n_features() {
            return Err(Error::Usage(format!(
                "feature index {feature} out of range (M = {})",
                ds.n_features()
            )));
        }
        if self.uses_feature(feature) {
            return Err(Error::Usage(format!(
                "feature {feature} already constrains this leaf"
            )));
        }
        let col = ds.column(feature);
        let capture = if polarity {
            self.capture.and(col)?
        } else {
            self.capture.and_not(col)?
        };
        let mut clauses = self.clauses.clone();
        let pos = clauses.partition_point(|c| (c.feature as usize) < feature);
        clauses.insert(pos, Clause::new(feature, polarity));
        Ok(Leaf::from_capture(problem, clauses, capture, dead_features))
    }

    fn from_capture(
        problem: &Problem<'_>,
        clauses: Vec<Clause>,
        capture: BitVector,
        dead_features: BitVector,
    ) -> Leaf {
        let ds = problem.dataset();
        let n_captured = capture.count_ones();
        let n_ones = capture.and_count(ds.labels()).expect("capture length is N");
        let b0_count = capture
            .and_count(problem.equivalence().z())
            .expect("capture length is N");
        let dead = is_dead(problem.scale(), n_captured);
        Leaf {
            id: UNINTERNED,
            clauses,
            capture,
            n_captured,
            n_ones,
            b0_count,
            dead,
            dead_features,
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn capture(&self) -> &BitVector {
        &self.capture
    }

    pub fn n_captured(&self) -> usize {
        self.n_captured
    }

    pub fn n_ones(&self) -> usize {
        self.n_ones
    }

    pub fn n_correct(&self) -> usize {
        self.n_ones.max(self.n_captured - self.n_ones)
    }

    pub fn prediction(&self) -> bool {
        self.n_ones > self.n_captured - self.n_ones
    }

    pub fn mistakes(&self) -> usize {
        self.n_captured - self.n_correct()
    }

    pub fn b0_count(&self) -> usize {
        self.b0_count
    }

    /// Support below `2λ`: the leaf may appear in a tree but is never split.
    pub fn is_dead(&self) -> bool {
        self.dead
    }

    pub fn dead_features(&self) -> &BitVector {
        &self.dead_features
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.clauses.iter().any(|c| c.feature as usize == feature)
    }

    /// Whether the sample with feature values `row` satisfies every clause.
    pub fn matches(&self, row: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| row[c.feature as usize] == c.polarity)
    }

    pub(crate) fn mistake_units(&self, scale: &Scale) -> Score {
        scale.samples(self.mistakes())
    }

    /// Ordering of the canonical clause sequences.
    pub fn canonical_cmp(&self, other: &Leaf) -> Ordering {
        self.clauses.cmp(&other.clauses)
    }
}

impl fmt::Debug for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Leaf")
            .field("clauses", &self.clauses)
            .field("n_captured", &self.n_captured)
            .field("n_ones", &self.n_ones)
            .field("prediction", &u8::from(self.prediction()))
            .field("dead", &self.dead)
            .finish()
    }
}

/// `n_captured / N < 2λ`, decided exactly.
pub(crate) fn is_dead(scale: &Scale, n_captured: usize) -> bool {
    scale.samples(n_captured) < scale.leaves(2)
}

/// Fraction of all samples captured.
pub fn normalized_support(capture: &BitVector, n: usize) -> Result<ExactValue> {
    if n == 0 {
        return Err(Error::Usage("normalized support needs N > 0".into()));
    }
    if capture.len() != n {
        return Err(Error::Usage(format!(
            "capture has length {} but N = {n}",
            capture.len()
        )));
    }
    Ok(ExactValue::ratio(capture.count_ones() as i128, n as i128))
}
