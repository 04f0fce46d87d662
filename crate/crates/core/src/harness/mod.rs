//! Multi-run experiments: orchestration, summaries, significance tests and
//! CSV output.

mod config;
mod illustrate;
mod output;
pub mod stats;

pub use config::{
    instance_seed, run_seed, DomainPreset, ExperimentConfig, FunctionConfig, ResolvedVariant, VariantConfig,
    VariantEntry, DESK_SCALE_TOML,
};
pub use illustrate::{illustrate, IllustrateOptions, IllustrateReport, Snapshot, GRID_SIZE, SNAPSHOT_ITERATIONS};
pub use output::{
    emit_convergence_data, format_num, median_series, read_runs_csv, write_experiment_outputs, write_runs_csv,
    write_significance_csv, write_significance_to, write_summary_csv, write_trace_csv, ExperimentFiles, Manifest,
    MedianPoint,
};

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{make_function, BenchSpec};
use crate::optimizer::{run_variant, RunRecord, Variant};
use stats::{describe, pooled_one_sided, welch_one_sided, StatsError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {format} configuration: {message}")]
    Parse { format: &'static str, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("no runs for function '{function}', variant '{variant}'")]
    MissingCell { function: String, variant: String },
    #[error("significance test for '{function}': {source}")]
    Stats { function: String, source: StatsError },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }
}

/// One finished run, tagged with its grid position.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub function: String,
    pub variant: String,
    pub run: usize,
    pub seed: u64,
    pub record: RunRecord,
}

/// Final best value per run, the input of summaries and tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalValue {
    pub function: String,
    pub variant: String,
    pub run: usize,
    pub seed: u64,
    pub final_best: f64,
    pub evaluations: usize,
    pub runtime_s: f64,
}

impl From<&RunResult> for FinalValue {
    fn from(r: &RunResult) -> Self {
        FinalValue {
            function: r.function.clone(),
            variant: r.variant.clone(),
            run: r.run,
            seed: r.seed,
            final_best: r.record.best_value,
            evaluations: r.record.evaluations,
            runtime_s: r.record.wall_time_s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub function: String,
    pub variant: String,
    pub run: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedEntry {
    pub function: String,
    pub variant: String,
    pub run: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// Sorted by (function, variant, run) in configuration order.
    pub runs: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    /// Every scheduled run either finished or failed; `false` after a
    /// cancellation.
    pub complete: bool,
    pub seeds: Vec<SeedEntry>,
    pub instance_seeds: Vec<(String, u64)>,
}

impl ExperimentResult {
    pub fn final_values(&self) -> Vec<FinalValue> {
        self.runs.iter().map(FinalValue::from).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExecOptions {
    /// Worker threads; `0` lets the pool pick.
    pub parallelism: usize,
    /// Raised to stop scheduling new runs; runs already started finish.
    pub cancel: Option<Arc<AtomicBool>>,
}

struct Job {
    function: usize,
    variant: usize,
    run: usize,
    seed: u64,
}

/// Executes every (function, variant, run) cell on a bounded worker pool.
///
/// Results are sorted by grid position afterwards, so the output does not
/// depend on the number of threads or on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &ExecOptions) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let variants = cfg.variants()?;
    let mut specs: Vec<(String, BenchSpec)> = Vec::new();
    let mut instance_seeds = Vec::new();
    for f in &cfg.functions {
        let s = instance_seed(cfg.base_seed, f.label());
        specs.push((f.label().to_string(), f.spec(cfg.dim, s)?));
        instance_seeds.push((f.label().to_string(), s));
    }
    let mut jobs = Vec::new();
    let mut seeds = Vec::new();
    for (fi, (flabel, _)) in specs.iter().enumerate() {
        for (vi, v) in variants.iter().enumerate() {
            for run in 0..cfg.runs {
                let seed = run_seed(cfg.base_seed, flabel, &v.label, run);
                seeds.push(SeedEntry { function: flabel.clone(), variant: v.label.clone(), run, seed });
                jobs.push(Job { function: fi, variant: vi, run, seed });
            }
        }
    }

    let execute = |job: &Job| -> Option<Result<RunResult, RunFailure>> {
        if opts.cancel.as_ref().is_some_and(|c| c.load(Ordering::SeqCst)) {
            return None;
        }
        let (flabel, spec) = &specs[job.function];
        let v = &variants[job.variant];
        let fail = |message: String| RunFailure {
            function: flabel.clone(),
            variant: v.label.clone(),
            run: job.run,
            seed: job.seed,
            message,
        };
        let n_par = if v.params.variant == Variant::Bo { 2 * cfg.dim + 1 } else { v.params.n_par };
        let run_cfg = cfg.run_config(job.seed, n_par);
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            let objective = make_function(spec.clone()).map_err(|e| e.to_string())?;
            run_variant(&objective, &spec.domain, &v.params, &run_cfg).map_err(|e| e.to_string())
        }));
        Some(match outcome {
            Ok(Ok(record)) => Ok(RunResult {
                function: flabel.clone(),
                variant: v.label.clone(),
                run: job.run,
                seed: job.seed,
                record,
            }),
            Ok(Err(msg)) => Err(fail(msg)),
            Err(payload) => Err(fail(panic_message(payload.as_ref()))),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Option<Result<RunResult, RunFailure>>> = pool.install(|| jobs.par_iter().map(execute).collect());

    let complete = outcomes.iter().all(Option::is_some);
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            Ok(r) => runs.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(ExperimentResult { runs, failures, complete, seeds, instance_seeds })
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".to_string()
    }
}

/// Statistics of final best values for one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: String,
    pub variant: String,
    pub runs: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub sd: f64,
    pub mean_runtime_s: f64,
}

/// Groups final values by (function, variant) in first-appearance order.
fn cells(values: &[FinalValue]) -> Vec<((String, String), Vec<&FinalValue>)> {
    let mut out: Vec<((String, String), Vec<&FinalValue>)> = Vec::new();
    for v in values {
        let key = (v.function.clone(), v.variant.clone());
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, list)) => list.push(v),
            None => out.push((key, vec![v])),
        }
    }
    out
}

/// One row per (function, variant) cell, in first-appearance order.
pub fn summarize(values: &[FinalValue]) -> Vec<SummaryRow> {
    cells(values)
        .into_iter()
        .map(|((function, variant), list)| {
            let finals: Vec<f64> = list.iter().map(|v| v.final_best).collect();
            let runtimes: Vec<f64> = list.iter().map(|v| v.runtime_s).collect();
            let d = describe(&finals);
            SummaryRow {
                function,
                variant,
                runs: d.n,
                min: d.min,
                median: d.median,
                mean: d.mean,
                max: d.max,
                sd: d.sd,
                mean_runtime_s: describe(&runtimes).mean,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub function: String,
    pub reference: String,
    pub other: String,
    pub t: f64,
    /// Probability of a t at most as large under equal means; small values
    /// mean the reference has the lower mean.
    pub p: f64,
    pub significant_5pct: bool,
}

/// One-sided tests of `mean(reference) < mean(other)` for every function
/// and every other variant. Zero-variance ties are reported as `t = 0`,
/// `p = 0.5`.
pub fn significance_table(
    values: &[FinalValue],
    reference: &str,
    pooled: bool,
) -> Result<Vec<SignificanceRow>, HarnessError> {
    let grid = cells(values);
    let mut functions: Vec<&str> = Vec::new();
    let mut variants: Vec<&str> = Vec::new();
    for ((f, v), _) in &grid {
        if !functions.contains(&f.as_str()) {
            functions.push(f);
        }
        if !variants.contains(&v.as_str()) {
            variants.push(v);
        }
    }
    if !variants.contains(&reference) {
        return Err(HarnessError::Config(format!("reference variant '{reference}' has no runs")));
    }
    let sample = |f: &str, v: &str| -> Result<Vec<f64>, HarnessError> {
        grid.iter()
            .find(|((gf, gv), _)| gf == f && gv == v)
            .map(|(_, list)| list.iter().map(|x| x.final_best).collect())
            .ok_or_else(|| HarnessError::MissingCell { function: f.into(), variant: v.into() })
    };
    let test = if pooled { pooled_one_sided } else { welch_one_sided };
    let mut rows = Vec::new();
    for f in &functions {
        let a = sample(f, reference)?;
        for v in variants.iter().filter(|v| **v != reference) {
            let b = sample(f, v)?;
            let (t, p) = match test(&a, &b) {
                Ok(r) => (r.t, r.p),
                Err(StatsError::DegenerateSamples) => (0.0, 0.5),
                Err(source) => return Err(HarnessError::Stats { function: f.to_string(), source }),
            };
            rows.push(SignificanceRow {
                function: f.to_string(),
                reference: reference.to_string(),
                other: v.to_string(),
                t,
                p,
                significant_5pct: p < 0.05,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(function: &str, variant: &str, run: usize, final_best: f64) -> FinalValue {
        FinalValue {
            function: function.into(),
            variant: variant.into(),
            run,
            seed: run as u64,
            final_best,
            evaluations: 10,
            runtime_s: 0.5,
        }
    }

    #[test]
    fn single_run_summary() {
        let rows = summarize(&[fv("sphere", "a3", 0, 2.5)]);
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!((r.min, r.median, r.mean, r.max, r.sd), (2.5, 2.5, 2.5, 2.5, 0.0));
    }

    #[test]
    fn summary_is_order_invariant() {
        let vals: Vec<FinalValue> = (0..9).map(|i| fv("f", "v", i, (i as f64 * 0.37).sin() * 1e3)).collect();
        let mut rev = vals.clone();
        rev.reverse();
        assert_eq!(summarize(&vals), summarize(&rev));
    }

    #[test]
    fn significance_dominance_and_self() {
        let mut vals = Vec::new();
        for f in ["f1", "f2"] {
            for i in 0..10 {
                vals.push(fv(f, "ref", i, i as f64 * 0.01));
                vals.push(fv(f, "bad", i, 100.0 + i as f64 * 0.01));
            }
        }
        let rows = significance_table(&vals, "ref", false).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.significant_5pct && r.p < 1e-10));
        let rows = significance_table(&vals, "bad", true).unwrap();
        assert!(rows.iter().all(|r| !r.significant_5pct && r.p > 0.99));
    }

    #[test]
    fn missing_cell_is_reported() {
        let vals = vec![fv("f1", "ref", 0, 1.0), fv("f1", "ref", 1, 2.0), fv("f2", "other", 0, 1.0)];
        assert!(matches!(significance_table(&vals, "ref", false), Err(HarnessError::MissingCell { .. })));
    }
}
