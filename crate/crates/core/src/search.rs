//! Best-first branch-and-bound over partial trees.
//!
//! Every expansion works on one *designated* leaf, the first splittable leaf
//! in canonical order. Its children are the tree with that leaf retired
//! (marked unchanged) and, for every admissible split feature, the tree with
//! the leaf replaced by its two children under each allowed assignment of
//! the children to unchanged/splittable. Any tree is reachable this way, and
//! trees reached along several orders are deduplicated by the tree cache.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::bitvec::BitVector;
use num_bigint::BigUint;

use crate::bounds::{
    remaining_evaluations_exact, remaining_log10_grouped, BoundToggles, RemainingEntry,
};
use crate::cache::{LeafCache, LeafKey, Split, SplitTable, TreeCache, TreeKey};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exact::{ExactValue, Scale, Score};
use crate::greedy::{greedy_fit, GreedyParams};
use crate::leaf::{Clause, Leaf};
use crate::scheduler::{Policy, WorkQueue};
use crate::tree::TreeState;
use crate::Problem;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Limits {
    pub time_limit: Option<Duration>,
    pub max_trees: Option<u64>,
    /// Combined size of the leaf and tree caches.
    pub max_cache_entries: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub lambda: ExactValue,
    pub policy: Policy,
    pub toggles: BoundToggles,
    pub warm_start: bool,
    pub limits: Limits,
    /// Evaluations between trace records.
    pub trace_interval: u64,
    /// Record popped bounds, detect duplicate expansions and check every
    /// generated tree against a from-scratch recomputation.
    pub audit: bool,
}

impl SearchConfig {
    pub fn new(lambda: ExactValue) -> SearchConfig {
        SearchConfig {
            lambda,
            policy: Policy::Curiosity,
            toggles: BoundToggles::default(),
            warm_start: true,
            limits: Limits::default(),
            trace_interval: 10_000,
            audit: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_positive() {
            return Err(Error::Usage(format!(
                "lambda must be > 0 (got {}); with lambda = 0 every fully grown tree is optimal",
                self.lambda
            )));
        }
        if self.trace_interval == 0 {
            return Err(Error::Usage("trace interval must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The queue ran empty.
    Exhausted,
    TimeLimit,
    TreeLimit,
    CacheLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    /// Trees whose objective was computed, the root included.
    pub trees_evaluated: u64,
    /// Value of `trees_evaluated` when the final best tree was found.
    pub trees_to_optimum: u64,
    pub time_to_optimum_s: f64,
    pub total_time_s: f64,
    pub expansions: u64,
    pub max_queue_size: usize,
    pub tree_cache_size: usize,
    pub tree_cache_hits: u64,
    pub leaf_cache_size: usize,
    pub leaf_cache_hits: u64,
    /// Popped entries discarded because the best objective had improved.
    pub stale_discarded: u64,
    pub cache_entries_collected: u64,
    pub best_updates: u64,
}

impl Stats {
    /// Copy with wall-clock fields zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> Stats {
        Stats {
            time_to_optimum_s: 0.0,
            total_time_s: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub elapsed_s: f64,
    pub trees_evaluated: u64,
    pub best_objective: ExactValue,
    /// `None` when the queue is empty.
    pub min_queue_lower_bound: Option<ExactValue>,
    pub queue_size: usize,
    /// `⌊log10⌋` of the remaining-evaluation bound; `None` when nothing remains.
    pub log10_remaining_bound: Option<i64>,
}

/// Extra observations collected when [`SearchConfig::audit`] is set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Audit {
    /// Lower bounds of expanded trees in expansion order.
    pub popped_lower_bounds: Vec<ExactValue>,
    /// Expansions of a tree key that had already been expanded.
    pub duplicate_expansions: u64,
    /// Trees checked against a from-scratch recomputation.
    pub trees_checked: u64,
    /// Exact remaining-evaluation bound at each trace record.
    pub remaining_exact: Vec<BigUint>,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_tree: TreeState,
    pub objective: ExactValue,
    pub certified: bool,
    /// `best − min surviving lower bound`; zero when certified.
    pub gap: ExactValue,
    pub stop: StopReason,
    pub stats: Stats,
    pub trace: Vec<TraceRecord>,
    pub audit: Option<Audit>,
}

/// Learns a tree minimizing `mistakes/N + λ·H` on `ds`.
pub fn fit(ds: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let problem = Problem::new(ds, config.lambda)?;
    fit_problem(&problem, config)
}

/// [`fit`] on a prepared problem; `config.lambda` must match the problem's.
pub fn fit_problem(problem: &Problem<'_>, config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    if problem.lambda() != config.lambda {
        return Err(Error::Usage(
            "config lambda differs from the problem's lambda".into(),
        ));
    }
    Search::new(problem, config).run()
}

/// `certified ⟺ queue exhausted`; the gap is measured against the smallest
/// surviving lower bound.
pub fn certify(best: ExactValue, surviving_lower_bounds: &[ExactValue]) -> (bool, ExactValue) {
    match surviving_lower_bounds.iter().min() {
        None => (true, ExactValue::ZERO),
        Some(&lb) => {
            let gap = best - lb;
            (false, if gap.is_positive() { gap } else { ExactValue::ZERO })
        }
    }
}

/// Candidate for the similar-support comparison among siblings.
struct Sibling {
    feature: u32,
    assignment: usize,
    score: Score,
    low_capture: Arc<Leaf>,
    tree: Option<TreeState>,
}

struct Search<'p, 'd> {
    problem: &'p Problem<'d>,
    cfg: &'p SearchConfig,
    t: BoundToggles,
    scale: Scale,
    lambda_u: Score,
    leaves: LeafCache,
    trees: TreeCache,
    queue: WorkQueue,
    best: Score,
    best_tree: TreeState,
    stats: Stats,
    trace: Vec<TraceRecord>,
    start: Instant,
    next_trace: u64,
    audit: Option<(Audit, FxHashSet<TreeKey>)>,
}

impl<'p, 'd> Search<'p, 'd> {
    fn new(problem: &'p Problem<'d>, cfg: &'p SearchConfig) -> Self {
        let scale = *problem.scale();
        Search {
            problem,
            cfg,
            t: cfg.toggles,
            scale,
            lambda_u: scale.lambda_units(),
            leaves: LeafCache::new(),
            trees: TreeCache::new(),
            queue: WorkQueue::new(cfg.policy),
            best: Score::ZERO,
            best_tree: problem.root_tree(),
            stats: Stats::default(),
            trace: Vec::new(),
            start: Instant::now(),
            next_trace: cfg.trace_interval,
            audit: cfg.audit.then(Default::default),
        }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn run(mut self) -> Result<SearchResult> {
        let root_leaf = self
            .leaves
            .intern(&LeafKey::new(&[])?, || Ok(Leaf::root(self.problem)))?;
        let root = TreeState::root(root_leaf, &self.scale);
        self.stats.trees_evaluated = 1;
        self.stats.trees_to_optimum = 1;
        self.best = root.objective();
        self.best_tree = root.clone();
        if self.cfg.warm_start {
            let params = GreedyParams::for_lambda(self.cfg.lambda, self.problem.m())?;
            let greedy = greedy_fit(self.problem, &params)?;
            if greedy.objective() < self.best {
                self.best = greedy.objective();
                self.best_tree = greedy;
            }
        }
        self.check_tree(&root)?;
        if self.t.permutation_cache {
            self.trees
                .tree_seen_or_mark(TreeKey::of(&root), root.lower_bound());
        }
        if self.should_push(&root) {
            self.queue.push(root, &self.scale);
        }
        self.record_trace()?;

        let mut stop = StopReason::Exhausted;
        while let Some(tree) = self.queue.pop() {
            if !self.should_push(&tree) {
                self.stats.stale_discarded += 1;
                continue;
            }
            if let Some((audit, expanded)) = &mut self.audit {
                audit
                    .popped_lower_bounds
                    .push(self.scale.to_exact(tree.lower_bound()));
                if self.t.permutation_cache && !expanded.insert(TreeKey::of(&tree)) {
                    audit.duplicate_expansions += 1;
                }
            }
            self.expand(&tree)?;
            self.stats.expansions += 1;
            while self.stats.trees_evaluated >= self.next_trace {
                self.record_trace()?;
                self.next_trace += self.cfg.trace_interval;
            }
            if let Some(reason) = self.limit_reached() {
                stop = reason;
                break;
            }
        }
        self.finish(stop)
    }

    fn limit_reached(&self) -> Option<StopReason> {
        let limits = &self.cfg.limits;
        if let Some(max) = limits.max_trees {
            if self.stats.trees_evaluated >= max {
                return Some(StopReason::TreeLimit);
            }
        }
        if let Some(max) = limits.max_cache_entries {
            if self.trees.len() + self.leaves.len() > max {
                return Some(StopReason::CacheLimit);
            }
        }
        if let Some(limit) = limits.time_limit {
            if self.start.elapsed() >= limit {
                return Some(StopReason::TimeLimit);
            }
        }
        None
    }

    fn finish(mut self, stop: StopReason) -> Result<SearchResult> {
        if stop != StopReason::Exhausted {
            let best = self.best;
            let (t, lambda_u) = (self.t, self.lambda_u);
            let removed = self
                .queue
                .retain(|tree| push_test(tree, best, t, lambda_u));
            self.stats.stale_discarded += removed as u64;
        }
        let surviving: Vec<ExactValue> = self
            .queue
            .iter()
            .map(|t| self.scale.to_exact(t.lower_bound()))
            .collect();
        let objective = self.scale.to_exact(self.best);
        let (certified, gap) = certify(objective, &surviving);
        self.record_trace()?;
        self.stats.total_time_s = self.elapsed();
        self.stats.max_queue_size = self.queue.max_len();
        self.stats.tree_cache_size = self.trees.len();
        self.stats.tree_cache_hits = self.trees.hits();
        self.stats.leaf_cache_size = self.leaves.len();
        self.stats.leaf_cache_hits = self.leaves.hits();
        Ok(SearchResult {
            best_tree: self.best_tree,
            objective,
            certified,
            gap,
            stop,
            stats: self.stats,
            trace: self.trace,
            audit: self.audit.map(|(a, _)| a),
        })
    }

    fn record_trace(&mut self) -> Result<()> {
        let mut min_b: Option<Score> = None;
        let mut groups: FxHashMap<(Score, u64), u64> = FxHashMap::default();
        for tree in self.queue.iter() {
            let b = tree.lower_bound();
            min_b = Some(min_b.map_or(b, |m| m.min(b)));
            *groups.entry((b, tree.k() as u64)).or_default() += 1;
        }
        let mut groups: Vec<_> = groups.into_iter().collect();
        groups.sort_unstable();
        let log10 = remaining_log10_grouped(
            self.best,
            groups.into_iter().map(|((b, l), c)| (b, l, c)),
            &self.scale,
            self.problem.m(),
        );
        self.trace.push(TraceRecord {
            elapsed_s: self.elapsed(),
            trees_evaluated: self.stats.trees_evaluated,
            best_objective: self.scale.to_exact(self.best),
            min_queue_lower_bound: min_b.map(|b| self.scale.to_exact(b)),
            queue_size: self.queue.len(),
            log10_remaining_bound: log10,
        });
        if let Some((audit, _)) = &mut self.audit {
            let entries: Vec<RemainingEntry> = self
                .queue
                .iter()
                .map(|t| RemainingEntry {
                    lower_bound: self.scale.to_exact(t.lower_bound()),
                    leaf_count: t.k() as u64,
                })
                .collect();
            let best = self.scale.to_exact(self.best);
            audit.remaining_exact.push(remaining_evaluations_exact(
                best,
                &entries,
                self.scale.lambda(),
                self.problem.m(),
            )?);
        }
        Ok(())
    }

    fn should_push(&self, tree: &TreeState) -> bool {
        push_test(tree, self.best, self.t, self.lambda_u)
    }

    fn check_tree(&mut self, tree: &TreeState) -> Result<()> {
        if let Some((audit, _)) = &mut self.audit {
            tree.check_invariants(&self.scale)?;
            audit.trees_checked += 1;
        }
        Ok(())
    }

    fn improve(&mut self, tree: &TreeState) {
        self.best = tree.objective();
        self.best_tree = tree.clone();
        self.stats.trees_to_optimum = self.stats.trees_evaluated;
        self.stats.time_to_optimum_s = self.elapsed();
        self.stats.best_updates += 1;
        if self.t.permutation_cache {
            let margin = if self.t.lookahead {
                self.lambda_u
            } else {
                Score::ZERO
            };
            self.stats.cache_entries_collected +=
                self.trees.garbage_collect(self.best, margin) as u64;
        }
    }

    /// Deduplicates and evaluates `child`; returns it when it should be
    /// queued.
    fn evaluate(&mut self, child: TreeState, parent: &TreeState) -> Result<Option<TreeState>> {
        if child.lower_bound() >= self.best {
            return Ok(None);
        }
        if self.t.permutation_cache
            && self
                .trees
                .tree_seen_or_mark(TreeKey::of(&child), child.lower_bound())
        {
            return Ok(None);
        }
        self.stats.trees_evaluated += 1;
        self.check_tree(&child)?;
        if child.objective() < self.best {
            self.improve(&child);
        }
        if !self.should_push(&child) {
            return Ok(None);
        }
        if self.t.lookahead {
            // Parent-specific leaf cap, applied to the descendants of `child`.
            let slack = self
                .scale
                .floor_div_lambda(self.best - parent.lower_bound())
                .unwrap_or(i128::MAX);
            let m = self.problem.m();
            let full = if m >= 100 { i128::MAX } else { 1i128 << m.min(100) };
            let cap = (parent.h() as i128).saturating_add(slack).min(full);
            if child.h() as i128 >= cap {
                return Ok(None);
            }
        }
        Ok(Some(child))
    }

    fn push(&mut self, tree: TreeState) {
        self.queue.push(tree, &self.scale);
    }

    fn expand(&mut self, tree: &TreeState) -> Result<()> {
        let Some(idx) = tree.designated() else {
            return Ok(());
        };
        let leaf = Arc::clone(&tree.slots()[idx].leaf);
        let scale = self.scale;

        let retire_forbidden = tree
            .partner_of(leaf.id())
            .and_then(|p| tree.slot_of(p))
            .is_some_and(|s| !s.splittable);
        if !retire_forbidden {
            let b = tree.lower_bound() + leaf.mistake_units(&scale);
            let child = tree.retired(idx, b, &scale);
            if let Some(c) = self.evaluate(child, tree)? {
                self.push(c);
            }
        }
        if self.t.node_support && leaf.is_dead() {
            return Ok(());
        }

        let table = self.split_table(&leaf)?;
        let delta_h = if tree.n_leaves() == 1 { 2 } else { 1 };
        let base_b = tree.lower_bound() + scale.leaves(delta_h);
        let other_split = tree.objective() - tree.lower_bound() - leaf.mistake_units(&scale);
        let other_b0 = tree.split_b0() - scale.samples(leaf.b0_count());
        let mut siblings: Vec<Sibling> = Vec::new();

        for split in &table.splits {
            let Split {
                feature,
                children,
                gain_ok,
            } = split;
            let must_pair = !gain_ok;
            let dead = children
                .each_ref()
                .map(|c| self.t.node_support && c.is_dead());
            for (assignment, flags) in ASSIGNMENTS.iter().enumerate() {
                if (flags[0] && dead[0]) || (flags[1] && dead[1]) {
                    continue;
                }
                if must_pair && !flags[0] && !flags[1] {
                    continue;
                }
                let mut b = base_b;
                let mut r = other_split;
                let mut b0 = other_b0;
                for (c, &s) in children.iter().zip(flags) {
                    if s {
                        r += c.mistake_units(&scale);
                        b0 += scale.samples(c.b0_count());
                    } else {
                        b += c.mistake_units(&scale);
                    }
                }
                if self.t.similar_support {
                    let score = if self.t.equivalent_points { b + b0 } else { b };
                    siblings.push(Sibling {
                        feature: *feature,
                        assignment,
                        score,
                        low_capture: Arc::clone(&children[0]),
                        tree: None,
                    });
                }
                if b >= self.best {
                    continue;
                }
                let child = tree.split(
                    idx,
                    [(&children[0], flags[0]), (&children[1], flags[1])],
                    must_pair,
                    b,
                    b + r,
                    &scale,
                );
                if let Some(c) = self.evaluate(child, tree)? {
                    if self.t.similar_support {
                        siblings.last_mut().expect("just pushed").tree = Some(c);
                    } else {
                        self.push(c);
                    }
                }
            }
        }

        if self.t.similar_support {
            self.push_similar(siblings)?;
        }
        Ok(())
    }

    /// Queues sibling candidates unless a same-assignment sibling split on a
    /// different feature proves, within `ω`, that none of their descendants
    /// can beat the best objective.
    fn push_similar(&mut self, siblings: Vec<Sibling>) -> Result<()> {
        let n = self.scale.n();
        let mut keep = Vec::new();
        for d in &siblings {
            let Some(tree) = &d.tree else { continue };
            let mut pruned = false;
            for other in &siblings {
                if other.assignment != d.assignment || other.feature == d.feature {
                    continue;
                }
                let diff = d
                    .low_capture
                    .capture()
                    .xor(other.low_capture.capture())?
                    .count_ones();
                debug_assert!(diff <= n);
                if other.score >= self.best + self.scale.samples(diff) {
                    pruned = true;
                    break;
                }
            }
            if !pruned {
                keep.push(tree.clone());
            }
        }
        for tree in keep {
            self.push(tree);
        }
        Ok(())
    }

    /// Admissible splits of `leaf`, computed once per leaf and cached.
    fn split_table(&mut self, leaf: &Arc<Leaf>) -> Result<Arc<SplitTable>> {
        if let Some(table) = self.leaves.split_table(leaf.id()) {
            return Ok(table);
        }
        let ds = self.problem.dataset();
        let scale = self.scale;
        let m = ds.n_features();
        let n = leaf.n_captured();
        let ones = leaf.n_ones();
        let mut rejected: BitVector = leaf.dead_features().clone();
        let mut candidates = Vec::new();
        for f in 0..m {
            if leaf.uses_feature(f) || leaf.dead_features().get(f) {
                continue;
            }
            let (n1, ones1) = leaf.capture().and_counts3(ds.column(f), ds.labels());
            let (n0, ones0) = (n - n1, ones - ones1);
            if n0 == 0 || n1 == 0 {
                rejected.set(f, true);
                continue;
            }
            let correct0 = ones0.max(n0 - ones0);
            let correct1 = ones1.max(n1 - ones1);
            if self.t.leaf_accuracy
                && (scale.samples(correct0) < self.lambda_u
                    || scale.samples(correct1) < self.lambda_u)
            {
                rejected.set(f, true);
                continue;
            }
            candidates.push((f, correct0 + correct1));
        }
        let mut table = SplitTable {
            splits: Vec::with_capacity(candidates.len()),
        };
        for (f, correct) in candidates {
            let gain = scale.samples(correct - leaf.n_correct());
            let gain_ok = !self.t.incremental_accuracy || gain >= self.lambda_u;
            let problem = self.problem;
            let children = [false, true].map(|polarity| {
                let mut clauses = leaf.clauses().to_vec();
                clauses.push(Clause::new(f, polarity));
                let key = LeafKey::new(&clauses)?;
                let dead = rejected.clone();
                self.leaves
                    .intern(&key, || leaf.child_with_dead(problem, f, polarity, dead))
            });
            let [c0, c1] = children;
            table.splits.push(Split {
                feature: f as u32,
                children: [c0?, c1?],
                gain_ok,
            });
        }
        let table = Arc::new(table);
        self.leaves.set_split_table(leaf.id(), Arc::clone(&table));
        Ok(table)
    }
}

/// Child flag assignments `(polarity false, polarity true)`; `true` = splittable.
const ASSIGNMENTS: [[bool; 2]; 4] = [[false, false], [false, true], [true, false], [true, true]];

/// Whether the children of `tree` can still improve on `best`.
fn push_test(tree: &TreeState, best: Score, t: BoundToggles, lambda_u: Score) -> bool {
    if tree.is_terminal() {
        return false;
    }
    let b = tree.lower_bound();
    if b >= best {
        return false;
    }
    let mut need = b;
    if t.lookahead {
        need += lambda_u;
    }
    if t.equivalent_points {
        need += tree.split_b0();
    }
    need < best
}
