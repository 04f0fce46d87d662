use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::median;
use super::{
    significance_table, summarize, ExperimentConfig, ExperimentResult, FinalValue, HarnessError, RunFailure, RunResult,
    SeedEntry, SignificanceRow, SummaryRow,
};

/// Ten significant digits in scientific notation.
pub fn format_num(x: f64) -> String {
    format!("{x:.9e}")
}

/// Shortest representation that parses back to the same value.
fn exact(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_rows_to(file, header, rows).map_err(|e| csv_err(path, e))
}

fn write_rows_to<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &["function", "variant", "min", "median", "mean", "max", "sd", "mean_runtime_s"],
        rows.iter().map(|r| {
            vec![
                r.function.clone(),
                r.variant.clone(),
                format_num(r.min),
                format_num(r.median),
                format_num(r.mean),
                format_num(r.max),
                format_num(r.sd),
                format_num(r.mean_runtime_s),
            ]
        }),
    )
}

const SIGNIFICANCE_HEADER: [&str; 6] = ["function", "reference", "other", "t", "p", "significant_5pct"];

fn significance_records(rows: &[SignificanceRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.function.clone(),
            r.reference.clone(),
            r.other.clone(),
            format_num(r.t),
            format_num(r.p),
            r.significant_5pct.to_string(),
        ]
    })
}

pub fn write_significance_csv(path: &Path, rows: &[SignificanceRow]) -> Result<(), HarnessError> {
    write_rows(path, &SIGNIFICANCE_HEADER, significance_records(rows))
}

/// Same content as [`write_significance_csv`], to any writer.
pub fn write_significance_to<W: Write>(out: W, rows: &[SignificanceRow]) -> Result<(), csv::Error> {
    write_rows_to(out, &SIGNIFICANCE_HEADER, significance_records(rows))
}

const RUNS_HEADER: [&str; 7] = ["function", "variant", "run", "seed", "final_best", "evaluations", "runtime_s"];

/// Per-run final values with round-trip precision.
pub fn write_runs_csv(path: &Path, values: &[FinalValue]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &RUNS_HEADER,
        values.iter().map(|v| {
            vec![
                v.function.clone(),
                v.variant.clone(),
                v.run.to_string(),
                v.seed.to_string(),
                exact(v.final_best),
                v.evaluations.to_string(),
                exact(v.runtime_s),
            ]
        }),
    )
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<FinalValue>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != RUNS_HEADER {
        return Err(csv_err(path, format!("expected header {}", RUNS_HEADER.join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

/// Long-format best-so-far traces, one row per recorded evaluation count.
pub fn write_trace_csv(path: &Path, results: &[&RunResult]) -> Result<(), HarnessError> {
    let rows = results.iter().flat_map(|r| {
        r.record.trace.iter().map(move |t| {
            vec![
                r.function.clone(),
                r.variant.clone(),
                r.seed.to_string(),
                t.evaluations.to_string(),
                exact(t.best_so_far),
                format!("{:.6}", t.elapsed_seconds),
            ]
        })
    });
    write_rows(path, &["function", "variant", "seed", "evaluations", "best_so_far", "elapsed_seconds"], rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianPoint {
    pub function: String,
    pub variant: String,
    pub evaluations: usize,
    pub median_best_so_far: f64,
    pub seeds: usize,
}

/// Median across seeds of best-so-far at every recorded evaluation count,
/// per variant in first-appearance order.
pub fn median_series(results: &[&RunResult]) -> Vec<MedianPoint> {
    let mut variants: Vec<(&str, &str)> = Vec::new();
    for r in results {
        if !variants.contains(&(r.function.as_str(), r.variant.as_str())) {
            variants.push((&r.function, &r.variant));
        }
    }
    let mut out = Vec::new();
    for (f, v) in variants {
        let group: Vec<&&RunResult> = results.iter().filter(|r| r.function == f && r.variant == v).collect();
        let mut evals: Vec<usize> = group.iter().flat_map(|r| r.record.trace.iter().map(|t| t.evaluations)).collect();
        evals.sort_unstable();
        evals.dedup();
        for k in evals {
            let vals: Vec<f64> = group
                .iter()
                .filter_map(|r| r.record.trace.iter().find(|t| t.evaluations == k).map(|t| t.best_so_far))
                .collect();
            out.push(MedianPoint {
                function: f.to_string(),
                variant: v.to_string(),
                evaluations: k,
                median_best_so_far: median(&vals),
                seeds: vals.len(),
            });
        }
    }
    out
}

fn median_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_median.csv"))
}

/// Writes the long-format trace CSV at `path` and the per-variant median
/// series beside it (`<stem>_median.csv`). Returns both paths.
pub fn emit_convergence_data(results: &[&RunResult], path: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    write_trace_csv(path, results)?;
    let mpath = median_path(path);
    write_rows(
        &mpath,
        &["function", "variant", "evaluations", "median_best_so_far", "seeds"],
        median_series(results).into_iter().map(|m| {
            vec![m.function, m.variant, m.evaluations.to_string(), exact(m.median_best_so_far), m.seeds.to_string()]
        }),
    )?;
    Ok((path.to_path_buf(), mpath))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub complete: bool,
    pub parallelism: usize,
    pub budget: usize,
    pub config: ExperimentConfig,
    pub instance_seeds: Vec<(String, u64)>,
    pub seeds: Vec<SeedEntry>,
    pub failures: Vec<RunFailure>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentFiles {
    pub summary: PathBuf,
    pub significance: Option<PathBuf>,
    pub runs: PathBuf,
    pub traces: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn safe_name(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes `summary.csv`, `runs.csv`, `significance.csv` (when a reference
/// variant is configured), `traces/<function>.csv` with median series, and
/// `manifest.json` under `out_dir`.
pub fn write_experiment_outputs(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    parallelism: usize,
) -> Result<ExperimentFiles, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let finals = result.final_values();
    let summary = out_dir.join("summary.csv");
    write_summary_csv(&summary, &summarize(&finals))?;
    let runs = out_dir.join("runs.csv");
    write_runs_csv(&runs, &finals)?;

    let significance = match &cfg.reference {
        Some(reference) if !finals.is_empty() => {
            let path = out_dir.join("significance.csv");
            write_significance_csv(&path, &significance_table(&finals, reference, cfg.pooled_variance)?)?;
            Some(path)
        }
        _ => None,
    };

    let mut traces = Vec::new();
    for f in &cfg.functions {
        let group: Vec<&RunResult> = result.runs.iter().filter(|r| r.function == f.label()).collect();
        if group.is_empty() {
            continue;
        }
        let path = out_dir.join("traces").join(format!("{}.csv", safe_name(f.label())));
        let (t, m) = emit_convergence_data(&group, &path)?;
        traces.push(t);
        traces.push(m);
    }

    let manifest_path = out_dir.join("manifest.json");
    let rel = |p: &Path| p.strip_prefix(out_dir).unwrap_or(p).to_string_lossy().into_owned();
    let mut files = vec![rel(&summary), rel(&runs)];
    files.extend(significance.iter().map(|p| rel(p)));
    files.extend(traces.iter().map(|p| rel(p)));
    let manifest = Manifest {
        tool: "gpswarm".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        complete: result.complete && result.failures.is_empty(),
        parallelism,
        budget: cfg.budget(),
        config: cfg.clone(),
        instance_seeds: result.instance_seeds.clone(),
        seeds: result.seeds.clone(),
        failures: result.failures.clone(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, json).map_err(|e| HarnessError::io(&manifest_path, e))?;
    Ok(ExperimentFiles { summary, significance, runs, traces, manifest: manifest_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_ten_digits() {
        assert_eq!(format_num(1234.5678901234), "1.234567890e3");
        assert_eq!(format_num(-0.5), "-5.000000000e-1");
        assert_eq!(format_num(0.0), "0.000000000e0");
    }

    #[test]
    fn exact_format_round_trips() {
        for x in [0.1 + 0.2, 1e-300, -7.25e17, std::f64::consts::PI] {
            assert_eq!(exact(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn median_path_suffix() {
        assert_eq!(median_path(Path::new("out/traces/ackley.csv")), PathBuf::from("out/traces/ackley_median.csv"));
    }
}
