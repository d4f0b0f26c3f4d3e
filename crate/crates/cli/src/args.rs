use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sparsetree::{BoundToggles, Policy};

#[derive(Debug, Parser)]
#[command(name = "sparsetree", version, about = "Certifiably optimal sparse decision trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn an optimal tree and write it as JSON.
    Fit(FitArgs),
    /// Score a saved model on labelled data.
    Predict(PredictArgs),
    /// Count distinct trees over `p` features up to depth `d`.
    Count(CountArgs),
    /// Re-run the search with each bound removed and with each policy.
    Ablate(AblateArgs),
    /// Exhaustive optimum for small instances.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Headed CSV of 0/1 cells.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    pub label: String,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECS")]
    pub time_limit: Option<f64>,
    #[arg(long, value_name = "N")]
    pub max_trees: Option<u64>,
    /// Combined leaf and tree cache entries.
    #[arg(long, value_name = "N")]
    pub max_cache_entries: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundFlags {
    #[arg(long)]
    pub no_lookahead: bool,
    #[arg(long)]
    pub no_support_bound: bool,
    #[arg(long)]
    pub no_incremental_accuracy: bool,
    #[arg(long)]
    pub no_accuracy_bound: bool,
    #[arg(long)]
    pub no_equiv_points: bool,
    #[arg(long)]
    pub no_permutation_cache: bool,
    #[arg(long)]
    pub similar_support: bool,
}

impl BoundFlags {
    pub fn toggles(&self) -> BoundToggles {
        BoundToggles {
            lookahead: !self.no_lookahead,
            node_support: !self.no_support_bound,
            incremental_accuracy: !self.no_incremental_accuracy,
            leaf_accuracy: !self.no_accuracy_bound,
            equivalent_points: !self.no_equiv_points,
            permutation_cache: !self.no_permutation_cache,
            similar_support: self.similar_support,
        }
    }
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: sparsetree::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Per-leaf penalty, as a decimal (`0.01`) or fraction (`1/100`).
    #[arg(long)]
    pub lambda: String,
    #[arg(long, default_value = "curiosity", value_parser = parse_policy)]
    pub policy: Policy,
    /// Model JSON destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace CSV destination.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Trees evaluated between trace records.
    #[arg(long, default_value_t = 1000)]
    pub trace_interval: u64,
    /// Search statistics as JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Seed the best objective with a greedy tree (default).
    #[arg(long, overrides_with = "no_warm_start")]
    pub warm_start: bool,
    #[arg(long, overrides_with = "warm_start")]
    pub no_warm_start: bool,
    #[command(flatten)]
    pub bounds: BoundFlags,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Write one predicted label per sample as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, value_name = "P")]
    pub features: u64,
    #[arg(long, value_name = "D")]
    pub depth: u64,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda: String,
    /// Table destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda: String,
    /// Largest tree considered; defaults to min(⌊1/λ⌋, 2^M).
    #[arg(long)]
    pub max_leaves: Option<usize>,
}
