use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gpswarm::bench::{make_function, Family};
use gpswarm::harness::{
    illustrate, instance_seed, read_runs_csv, run_experiment, significance_table, write_experiment_outputs,
    write_significance_csv, write_significance_to, write_trace_csv, DomainPreset, ExecOptions, ExperimentConfig,
    FunctionConfig, HarnessError, IllustrateOptions, RunResult,
};
use gpswarm::{run_variant, PsoParams, RunConfig, Variant};
use serde_json::json;

/// Environment variable that overrides the worker count.
const THREADS_ENV: &str = "GPSWARM_THREADS";

#[derive(Parser)]
#[command(name = "gpswarm", version, about = "Surrogate-guided particle swarm optimization and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer on one benchmark function.
    Run(RunArgs),
    /// Run a (function × variant × run) grid and write summaries.
    Experiment(ExperimentArgs),
    /// One-sided t-tests of a reference variant against the others.
    Significance(SignificanceArgs),
    /// Dump surrogate snapshots of a small 2-D run for plotting.
    Illustrate(IllustrateArgs),
    /// List the benchmark functions and their domains.
    ListFunctions,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "a3")]
    variant: String,
    #[arg(long, default_value = "ackley")]
    function: String,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Objective evaluations [default: 100 × dim]
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gpswarm-out/run")]
    out: PathBuf,
    /// Swarm size
    #[arg(long, default_value_t = 50)]
    n_par: usize,
    /// Domain preset: default or classical
    #[arg(long, default_value = "default")]
    domain: String,
    /// Apply a seeded random shift to the function
    #[arg(long)]
    shift: bool,
    /// Apply a seeded random rotation to the function
    #[arg(long)]
    rotate: bool,
    #[command(flatten)]
    tuning: Tuning,
}

/// Surrogate settings shared by `run` and `experiment`.
#[derive(Args)]
struct Tuning {
    /// Re-estimate kernel hyperparameters every N iterations [default: 5]
    #[arg(long)]
    refit_every: Option<usize>,
    /// Memory capacity in observations [default: 25 × swarm size]
    #[arg(long)]
    memory_cap: Option<usize>,
    /// Half-width of the memory acceptance band in posterior standard deviations [default: 1.15]
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML or JSON experiment file [default: the bundled desk-scale experiment]
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "gpswarm-out/experiment")]
    out: PathBuf,
    /// Runs per (function, variant) cell
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; GPSWARM_THREADS takes precedence [default: available cores]
    #[arg(long)]
    parallelism: Option<usize>,
    /// Base seed from which every run seed is derived
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    budget_per_dim: Option<usize>,
    /// Reference variant label for the significance table
    #[arg(long)]
    reference: Option<String>,
    /// Use Student's equal-variance test instead of Welch's
    #[arg(long)]
    pooled_variance: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SignificanceArgs {
    /// Per-run CSV written by `experiment` (runs.csv)
    input: PathBuf,
    /// Reference variant label
    #[arg(long)]
    reference: String,
    /// Use Student's equal-variance test instead of Welch's
    #[arg(long)]
    pooled_variance: bool,
    /// Output CSV [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IllustrateArgs {
    #[arg(long, default_value = "gpswarm-out/illustrate")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure classes with distinct exit codes.
enum Failure {
    /// Bad flags, config or input; exit 2.
    Config(String),
    /// Anything else; exit 1.
    Internal(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Significance(a) => cmd_significance(a),
        Command::Illustrate(a) => cmd_illustrate(a),
        Command::ListFunctions => {
            list_functions();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_domain(s: &str) -> Result<DomainPreset, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "default" => Ok(DomainPreset::Default),
        "classical" => Ok(DomainPreset::Classical),
        _ => Err(Failure::Config(format!("unknown domain preset '{s}' (expected default or classical)"))),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let variant: Variant = a.variant.parse().map_err(Failure::Config)?;
    if a.dim == 0 {
        return Err(Failure::Config("--dim must be positive".into()));
    }
    let function = FunctionConfig {
        domain: parse_domain(&a.domain)?,
        shift: a.shift,
        rotate: a.rotate,
        ..FunctionConfig::plain(&a.function)
    };
    let spec = function.spec(a.dim, instance_seed(a.seed, function.label()))?;
    let budget = a.budget.unwrap_or(100 * a.dim);
    let params = PsoParams::preset(variant, a.n_par);
    let n_par = if variant == Variant::Bo { 2 * a.dim + 1 } else { a.n_par };
    let mut run_cfg = RunConfig::new(budget, a.seed, n_par);
    if let Some(v) = a.tuning.refit_every {
        run_cfg.refit_every = v;
    }
    if let Some(v) = a.tuning.memory_cap {
        run_cfg.memory.cap = v;
    }
    if let Some(v) = a.tuning.rho {
        run_cfg.memory.rho = v;
    }

    let objective = make_function(spec.clone()).map_err(|e| Failure::Config(e.to_string()))?;
    let record =
        run_variant(&objective, &spec.domain, &params, &run_cfg).map_err(|e| Failure::Config(e.to_string()))?;

    std::fs::create_dir_all(&a.out).map_err(|e| internal(format!("{}: {e}", a.out.display())))?;
    let result = RunResult {
        function: function.label().to_string(),
        variant: variant.name().to_string(),
        run: 0,
        seed: a.seed,
        record,
    };
    write_trace_csv(&a.out.join("trace.csv"), &[&result])?;
    let r = &result.record;
    let summary = json!({
        "tool": "gpswarm",
        "version": env!("CARGO_PKG_VERSION"),
        "function": result.function,
        "variant": result.variant,
        "dim": a.dim,
        "budget": budget,
        "seed": a.seed,
        "shift": a.shift,
        "rotate": a.rotate,
        "domain": { "lower": spec.domain.lower(), "upper": spec.domain.upper() },
        "params": params,
        "run_config": run_cfg,
        "best_value": r.best_value,
        "best_position": r.best_position,
        "evaluations": r.evaluations,
        "iterations": r.iterations,
        "wall_time_s": r.wall_time_s,
        "refits": r.diagnostics.iter().filter(|d| d.refit).count(),
        "fit_failures": r.diagnostics.iter().filter(|d| d.fit_failed).count(),
        "fallback_iterations": r.diagnostics.iter().filter(|d| d.fallback).count(),
        "jitter_steps": r.jitter_total(),
    });
    let path = a.out.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary).map_err(internal)?)
        .map_err(|e| internal(format!("{}: {e}", path.display())))?;
    println!("{}", r.best_value);
    Ok(())
}

/// `GPSWARM_THREADS` wins over the flag; the default is the core count.
fn resolve_parallelism(flag: Option<usize>) -> Result<usize, Failure> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Failure::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    if flag == Some(0) {
        return Err(Failure::Config("--parallelism must be positive".into()));
    }
    Ok(env.or(flag).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::desk_scale(),
    };
    if let Some(v) = a.runs {
        cfg.runs = v;
    }
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.dim {
        cfg.dim = v;
    }
    if let Some(v) = a.budget_per_dim {
        cfg.budget_per_dim = v;
    }
    if let Some(v) = a.reference {
        cfg.reference = Some(v);
    }
    if a.pooled_variance {
        cfg.pooled_variance = true;
    }
    if let Some(v) = a.tuning.refit_every {
        cfg.refit_every = Some(v);
    }
    if let Some(v) = a.tuning.memory_cap {
        cfg.memory_cap = Some(v);
    }
    if let Some(v) = a.tuning.rho {
        cfg.rho = Some(v);
    }
    cfg.validate()?;
    let parallelism = resolve_parallelism(a.parallelism)?;

    let cancel = Arc::new(AtomicBool::new(false));
    {
        let cancel = cancel.clone();
        // Only fails when a handler is already installed, which cannot
        // happen in a single command.
        let _ = ctrlc::set_handler(move || {
            if cancel.swap(true, Ordering::SeqCst) {
                std::process::exit(130);
            }
            eprintln!("interrupt: finishing runs in progress (press again to abort)");
        });
    }
    let total = cfg.functions.len() * cfg.variants.len() * cfg.runs;
    eprintln!("running {total} runs on {parallelism} thread(s)");
    let result = run_experiment(&cfg, &ExecOptions { parallelism, cancel: Some(cancel) })?;
    let files = write_experiment_outputs(&a.out, &cfg, &result, parallelism)?;

    for f in &result.failures {
        eprintln!("run failed: {} / {} / run {} (seed {}): {}", f.function, f.variant, f.run, f.seed, f.message);
    }
    println!("summary: {}", files.summary.display());
    if let Some(p) = &files.significance {
        println!("significance: {}", p.display());
    }
    println!("manifest: {}", files.manifest.display());
    if !result.complete {
        return Err(Failure::Internal(format!(
            "interrupted after {} of {total} runs; partial results are in {}",
            result.runs.len() + result.failures.len(),
            a.out.display()
        )));
    }
    if !result.failures.is_empty() {
        return Err(Failure::Internal(format!("{} run(s) failed", result.failures.len())));
    }
    Ok(())
}

fn cmd_significance(a: SignificanceArgs) -> Result<(), Failure> {
    let values = read_runs_csv(&a.input)?;
    let rows = significance_table(&values, &a.reference, a.pooled_variance)?;
    match &a.out {
        Some(path) => write_significance_csv(path, &rows)?,
        None => write_significance_to(std::io::stdout().lock(), &rows).map_err(internal)?,
    }
    Ok(())
}

fn cmd_illustrate(a: IllustrateArgs) -> Result<(), Failure> {
    let report = illustrate(&a.out, &IllustrateOptions::new(a.seed))?;
    for s in &report.snapshots {
        println!(
            "iteration {:2}: {} evaluations, incumbent {:.6e} -> {}",
            s.iteration,
            s.evaluations,
            s.incumbent_value,
            s.directory.display()
        );
    }
    println!("final best after {} evaluations: {:.6e}", report.evaluations, report.final_best);
    Ok(())
}

fn list_functions() {
    println!("{:<22} {:>18} {:>18}", "function", "default domain", "classical domain");
    for f in Family::ALL {
        let (dl, dh) = f.default_bounds();
        let (cl, ch) = f.classical_bounds();
        println!("{:<22} {:>18} {:>18}", f.name(), format!("[{dl}, {dh}]"), format!("[{cl}, {ch}]"));
    }
}
