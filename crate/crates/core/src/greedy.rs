//! Top-down Gini splitting, used to seed the best objective.

use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bounds::max_leaves_apriori;
use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::leaf::Leaf;
use crate::tree::TreeState;
use crate::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub max_depth: usize,
    pub min_leaf_samples: usize,
}

impl GreedyParams {
    /// Depth `⌈log2 K⌉` where `K` is the a priori leaf bound for `λ`.
    pub fn for_lambda(lambda: ExactValue, m: usize) -> Result<GreedyParams> {
        let k = max_leaves_apriori(lambda, m)?.max(2);
        let depth = (u64::BITS - (k - 1).leading_zeros()) as usize;
        Ok(GreedyParams {
            max_depth: depth.max(1),
            min_leaf_samples: 1,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_leaf_samples == 0 {
            return Err(Error::Usage(
                "greedy max_depth and min_leaf_samples must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `Σ 2·ones·zeros / n` over the given (n, ones) parts: `N ×` weighted Gini.
fn weighted_gini(parts: &[(usize, usize)]) -> Ratio<i128> {
    parts
        .iter()
        .filter(|&&(n, _)| n > 0)
        .map(|&(n, ones)| {
            let zeros = n - ones;
            Ratio::new(2 * ones as i128 * zeros as i128, n as i128)
        })
        .sum()
}

/// Grows a tree top-down and returns it with every leaf unchanged.
pub fn greedy_fit(problem: &Problem<'_>, params: &GreedyParams) -> Result<TreeState> {
    params.validate()?;
    let mut leaves = Vec::new();
    grow(problem, params, Leaf::root(problem), 0, &mut leaves)?;
    TreeState::terminal(leaves, problem.scale())
}

fn grow(
    problem: &Problem<'_>,
    params: &GreedyParams,
    leaf: Leaf,
    depth: usize,
    out: &mut Vec<Arc<Leaf>>,
) -> Result<()> {
    let n = leaf.n_captured();
    let ones = leaf.n_ones();
    if depth >= params.max_depth || ones == 0 || ones == n || n < 2 * params.min_leaf_samples {
        out.push(Arc::new(leaf));
        return Ok(());
    }
    let ds = problem.dataset();
    let parent = weighted_gini(&[(n, ones)]);
    let mut best: Option<(Ratio<i128>, usize)> = None;
    for f in 0..ds.n_features() {
        if leaf.uses_feature(f) {
            continue;
        }
        let (n1, ones1) = leaf.capture().and_counts3(ds.column(f), ds.labels());
        let (n0, ones0) = (n - n1, ones - ones1);
        if n0 < params.min_leaf_samples || n1 < params.min_leaf_samples {
            continue;
        }
        let imp = weighted_gini(&[(n0, ones0), (n1, ones1)]);
        if imp < parent && best.as_ref().is_none_or(|(b, _)| imp < *b) {
            best = Some((imp, f));
        }
    }
    match best {
        None => out.push(Arc::new(leaf)),
        Some((_, f)) => {
            let hi = leaf.child(problem, f, true)?;
            let lo = leaf.child(problem, f, false)?;
            grow(problem, params, hi, depth + 1, out)?;
            grow(problem, params, lo, depth + 1, out)?;
        }
    }
    Ok(())
}
