use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use sparsetree::bounds::count_trees;
use sparsetree::oracle::{exhaustive_optimum, OracleLimits};
use sparsetree::search::{Limits, StopReason};
use sparsetree::{
    fit, BoundToggles, Dataset, Error, ExactValue, Model, Policy, SearchConfig, SearchResult,
    TraceRecord,
};

use crate::args::{
    AblateArgs, Command, CountArgs, DataArgs, FitArgs, LimitArgs, OracleArgs, PredictArgs,
};
use crate::{EXIT_OK, EXIT_UNCERTIFIED};

/// Digits after the point when objectives are shown as decimals.
const DECIMALS: usize = 6;

pub const TRACE_HEADER: [&str; 6] = [
    "elapsed_s",
    "trees_evaluated",
    "best_objective",
    "min_queue_lower_bound",
    "queue_size",
    "log10_remaining_bound",
];

pub const ABLATION_HEADER: [&str; 6] = [
    "variant",
    "total_time_s",
    "time_to_optimum_s",
    "total_trees_evaluated",
    "trees_to_optimum",
    "max_queue_size",
];

pub(crate) fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Count(a) => cmd_count(a, out),
        Command::Ablate(a) => cmd_ablate(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
    }
}

fn load(data: &DataArgs) -> Result<Dataset> {
    let file =
        File::open(&data.data).with_context(|| format!("cannot open {}", data.data.display()))?;
    Dataset::load_csv(file, &data.label)
        .with_context(|| format!("reading {}", data.data.display()))
}

fn parse_lambda(text: &str) -> Result<ExactValue> {
    let lambda = ExactValue::parse(text)?;
    if !lambda.is_positive() {
        return Err(Error::Usage(format!("lambda must be > 0 (got {})", text.trim())).into());
    }
    Ok(lambda)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn limits(args: &LimitArgs) -> Result<Limits> {
    let time_limit = match args.time_limit {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            bail!(Error::Usage(format!("time limit must be a nonnegative number of seconds, got {s}")))
        }
        s => s.map(Duration::from_secs_f64),
    };
    Ok(Limits {
        time_limit,
        max_trees: args.max_trees,
        max_cache_entries: args.max_cache_entries,
    })
}

fn show(v: ExactValue) -> String {
    format!("{v} ({})", v.to_decimal_string(DECIMALS))
}

fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<i32> {
    let lambda = parse_lambda(&args.lambda)?;
    let ds = load(&args.data)?;
    let cfg = SearchConfig {
        lambda,
        policy: args.policy,
        toggles: args.bounds.toggles(),
        warm_start: !args.no_warm_start,
        limits: limits(&args.limits)?,
        trace_interval: args.trace_interval,
        audit: false,
    };
    let result = fit(&ds, &cfg)?;
    let model = Model::from_tree(
        &ds,
        &result.best_tree,
        args.lambda.trim(),
        result.objective,
        result.certified,
    );

    let mut w = create(&args.out)?;
    writeln!(w, "{}", model.to_json()?)?;
    w.flush()?;
    if let Some(path) = &args.trace {
        write_trace(create(path)?, &result.trace)?;
    }
    if let Some(path) = &args.stats {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &result.stats)?;
        writeln!(w)?;
        w.flush()?;
    }
    print_summary(out, &ds, &result)?;
    Ok(if result.certified {
        EXIT_OK
    } else {
        EXIT_UNCERTIFIED
    })
}

fn print_summary(out: &mut dyn Write, ds: &Dataset, r: &SearchResult) -> Result<()> {
    let s = &r.stats;
    let accuracy = ExactValue::ratio(r.best_tree.n_correct() as i128, ds.n_samples() as i128);
    writeln!(out, "objective: {}", show(r.objective))?;
    writeln!(out, "training accuracy: {}", show(accuracy))?;
    writeln!(out, "leaves: {}", r.best_tree.n_leaves())?;
    writeln!(out, "certified: {}", r.certified)?;
    writeln!(out, "gap: {}", show(r.gap))?;
    writeln!(out, "stopped by: {}", stop_name(r.stop))?;
    writeln!(out, "trees evaluated: {}", s.trees_evaluated)?;
    writeln!(out, "trees to optimum: {}", s.trees_to_optimum)?;
    writeln!(out, "expansions: {}", s.expansions)?;
    writeln!(out, "max queue size: {}", s.max_queue_size)?;
    writeln!(out, "tree cache: {} entries, {} hits", s.tree_cache_size, s.tree_cache_hits)?;
    writeln!(out, "leaf cache: {} entries, {} hits", s.leaf_cache_size, s.leaf_cache_hits)?;
    writeln!(out, "total time: {:.3} s", s.total_time_s)?;
    writeln!(out, "time to optimum: {:.3} s", s.time_to_optimum_s)?;
    Ok(())
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Exhausted => "exhausted queue",
        StopReason::TimeLimit => "time limit",
        StopReason::TreeLimit => "tree limit",
        StopReason::CacheLimit => "cache limit",
    }
}

pub(crate) fn write_trace<W: Write>(sink: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_HEADER)?;
    for t in trace {
        w.write_record([
            format!("{:.6}", t.elapsed_s),
            t.trees_evaluated.to_string(),
            t.best_objective.to_decimal_string(12),
            t.min_queue_lower_bound
                .map(|b| b.to_decimal_string(12))
                .unwrap_or_default(),
            t.queue_size.to_string(),
            t.log10_remaining_bound
                .map(|g| g.to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("cannot read {}", args.model.display()))?;
    let model = Model::from_json(&text)?;
    let ds = load(&args.data)?;
    let predicted = model.predict(&ds)?;
    let n_correct = predicted
        .iter()
        .enumerate()
        .filter(|&(n, &p)| ds.label(n) == p)
        .count();
    let accuracy = ExactValue::ratio(n_correct as i128, ds.n_samples() as i128);
    writeln!(out, "accuracy: {}", show(accuracy))?;
    writeln!(out, "mistakes: {}", ds.n_samples() - n_correct)?;
    writeln!(out, "samples: {}", ds.n_samples())?;
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["prediction"])?;
        for p in predicted {
            w.write_record([u8::from(p).to_string()])?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> Result<i32> {
    if args.features == 0 || args.depth == 0 {
        bail!(Error::Usage("features and depth must both be at least 1".into()));
    }
    writeln!(out, "{}", count_trees(args.features, args.depth)?)?;
    Ok(EXIT_OK)
}

/// One row of the ablation table.
struct Variant {
    name: String,
    toggles: BoundToggles,
    policy: Policy,
}

fn variants() -> Vec<Variant> {
    let all = BoundToggles::default();
    let bound = |name: &str, toggles| Variant {
        name: name.into(),
        toggles,
        policy: Policy::Curiosity,
    };
    let mut v = vec![
        bound("all_bounds", all),
        bound("no_lookahead", BoundToggles { lookahead: false, ..all }),
        bound("no_support_bound", BoundToggles { node_support: false, ..all }),
        bound(
            "no_incremental_accuracy",
            BoundToggles { incremental_accuracy: false, ..all },
        ),
        bound("no_accuracy_bound", BoundToggles { leaf_accuracy: false, ..all }),
        bound("no_equiv_points", BoundToggles { equivalent_points: false, ..all }),
        bound(
            "no_permutation_cache",
            BoundToggles { permutation_cache: false, ..all },
        ),
    ];
    v.extend(Policy::ALL.iter().map(|&policy| Variant {
        name: format!("policy_{policy}"),
        toggles: all,
        policy,
    }));
    v
}

fn cmd_ablate(args: &AblateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let lambda = parse_lambda(&args.lambda)?;
    let ds = load(&args.data)?;
    let limits = limits(&args.limits)?;

    let mut rows = Vec::new();
    let mut agreed: Option<(String, ExactValue)> = None;
    let mut censored = 0;
    for v in variants() {
        let cfg = SearchConfig {
            lambda,
            policy: v.policy,
            toggles: v.toggles,
            limits,
            ..SearchConfig::new(lambda)
        };
        let r = fit(&ds, &cfg)?;
        let s = &r.stats;
        if r.certified {
            match &agreed {
                None => agreed = Some((v.name.clone(), r.objective)),
                Some((first, obj)) if *obj != r.objective => {
                    return Err(Error::Invariant(format!(
                        "{} certified {} but {first} certified {obj}",
                        v.name, r.objective
                    ))
                    .into());
                }
                Some(_) => {}
            }
            rows.push([
                v.name,
                format!("{:.6}", s.total_time_s),
                format!("{:.6}", s.time_to_optimum_s),
                s.trees_evaluated.to_string(),
                s.trees_to_optimum.to_string(),
                s.max_queue_size.to_string(),
            ]);
        } else {
            censored += 1;
            rows.push([
                v.name,
                ">limit".into(),
                ">limit".into(),
                format!(">{}", s.trees_evaluated),
                ">limit".into(),
                format!(">{}", s.max_queue_size),
            ]);
        }
    }

    match &args.out {
        Some(path) => write_rows(create(path)?, &rows)?,
        None => write_rows(&mut *out, &rows)?,
    }
    let summary: &mut dyn Write = if args.out.is_some() { out } else { err };
    match agreed {
        Some((_, obj)) => writeln!(summary, "certified objective (all variants): {}", show(obj))?,
        None => writeln!(summary, "no variant finished within the limits")?,
    }
    if censored > 0 {
        writeln!(summary, "{censored} variant(s) censored by limits")?;
        return Ok(EXIT_UNCERTIFIED);
    }
    Ok(EXIT_OK)
}

fn write_rows<W: Write>(sink: W, rows: &[[String; 6]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(ABLATION_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let lambda = parse_lambda(&args.lambda)?;
    let ds = load(&args.data)?;
    let limits = OracleLimits {
        max_leaves: args.max_leaves,
        ..OracleLimits::default()
    };
    let r = exhaustive_optimum(&ds, lambda, &limits)?;
    writeln!(out, "objective: {}", show(r.objective))?;
    writeln!(out, "mistakes: {}", r.mistakes)?;
    writeln!(out, "leaves: {}", r.leaves.len())?;
    let names = ds.feature_names();
    for clauses in &r.leaves {
        let text: Vec<String> = clauses
            .iter()
            .map(|c| format!("{}={}", names[c.feature as usize], u8::from(c.polarity)))
            .collect();
        if text.is_empty() {
            writeln!(out, "  (root)")?;
        } else {
            writeln!(out, "  {}", text.join(" & "))?;
        }
    }
    Ok(EXIT_OK)
}
