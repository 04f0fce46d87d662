use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gpswarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpswarm"))
        .args(args)
        .env_remove("GPSWARM_THREADS")
        .output()
        .expect("spawn gpswarm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Trace rows as (evaluations, best_so_far) text, timing column dropped.
fn trace_rows(path: &Path) -> Vec<(String, String)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ce = header.iter().position(|h| *h == "evaluations").unwrap();
    let cb = header.iter().position(|h| *h == "best_so_far").unwrap();
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[ce].to_string(), cols[cb].to_string())
        })
        .collect()
}

fn small_run(out: &Path, variant: &str, seed: &str) -> Output {
    gpswarm(&[
        "run",
        "--variant",
        variant,
        "--function",
        "sphere",
        "--dim",
        "2",
        "--budget",
        "60",
        "--n-par",
        "10",
        "--seed",
        seed,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = small_run(&out, "spso2011", "3");
    assert!(o.status.success(), "{}", stderr(&o));
    let printed: f64 = stdout(&o).trim().parse().expect("best value on stdout");

    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["evaluations"], 60);
    assert_eq!(summary["function"], "sphere");
    assert_eq!(summary["best_value"].as_f64().unwrap(), printed);

    let rows = trace_rows(&out.join("trace.csv"));
    assert_eq!(rows.last().unwrap().0, "60");
    let best: Vec<f64> = rows.iter().map(|r| r.1.parse().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*best.last().unwrap(), printed);
}

#[test]
fn run_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(small_run(&a, "a3", "11").status.success());
    assert!(small_run(&b, "a3", "11").status.success());
    assert_eq!(trace_rows(&a.join("trace.csv")), trace_rows(&b.join("trace.csv")));
}

#[test]
fn unknown_function_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpswarm(&["run", "--function", "nosuchfn", "--dim", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nosuchfn"), "{}", stderr(&o));
}

#[test]
fn unknown_variant_is_a_usage_error() {
    let o = gpswarm(&["run", "--variant", "zz", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zz"));
}

const SMALL_EXPERIMENT: &str = r#"
name = "tiny"
dim = 2
runs = 3
budget_per_dim = 20
n_par = 10
base_seed = 5
reference = "b"
functions = [{ name = "sphere" }, { name = "rastrigin", domain = "classical" }]
variants = ["spso2011", "b"]
"#;

#[test]
fn experiment_and_significance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, SMALL_EXPERIMENT).unwrap();
    let out = dir.path().join("exp");
    let o = Command::new(env!("CARGO_BIN_EXE_gpswarm"))
        .args(["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("GPSWARM_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("2 thread(s)"));

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 12);
    assert!(out.join("traces/sphere.csv").exists() && out.join("traces/rastrigin_median.csv").exists());
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["complete"], true);
    assert_eq!(manifest["parallelism"], 2);
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 12);

    // Recomputing the table from runs.csv reproduces the experiment's copy.
    let o = gpswarm(&["significance", out.join("runs.csv").to_str().unwrap(), "--reference", "b"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), fs::read_to_string(out.join("significance.csv")).unwrap());
    assert_eq!(stdout(&o).lines().count(), 1 + 2);
}

#[test]
fn experiment_without_functions_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "dim = 2\nfunctions = []\nvariants = [\"spso2011\"]\n").unwrap();
    let o = gpswarm(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn invalid_thread_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, SMALL_EXPERIMENT).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gpswarm"))
        .args(["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("GPSWARM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GPSWARM_THREADS"));
}

#[test]
fn significance_rejects_missing_reference() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    fs::write(
        &runs,
        "function,variant,run,seed,final_best,evaluations,runtime_s\n\
         f,x,0,1,1.0,10,0.1\nf,x,1,2,2.0,10,0.1\nf,y,0,3,3.0,10,0.1\nf,y,1,4,5.0,10,0.1\n",
    )
    .unwrap();
    let o = gpswarm(&["significance", runs.to_str().unwrap(), "--reference", "z"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gpswarm(&["significance", runs.to_str().unwrap(), "--reference", "x"]);
    assert!(o.status.success());
    // Means 1.5 vs 4.0 with variances 0.5 and 2: t = -2.5 / sqrt(1.25).
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(&row[..3], ["f", "x", "y"]);
    let t: f64 = row[3].parse().unwrap();
    assert!((t + 2.5 / 1.25f64.sqrt()).abs() < 1e-8);
}

#[test]
fn illustrate_writes_three_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpswarm(&["illustrate", "--out", dir.path().to_str().unwrap(), "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut incumbents = Vec::new();
    for it in ["iter_00", "iter_06", "iter_18"] {
        let d = dir.path().join(it);
        let grid = fs::read_to_string(d.join("grid.csv")).unwrap();
        assert_eq!(grid.lines().count(), 64 * 64 + 1);
        assert_eq!(fs::read_to_string(d.join("particles.csv")).unwrap().lines().count(), 11);
        incumbents.push(read_json(&d.join("snapshot.json"))["incumbent_value"].as_f64().unwrap());
    }
    assert!(incumbents[2] <= incumbents[1] && incumbents[1] <= incumbents[0]);
    assert_eq!(trace_rows(&dir.path().join("trace.csv")).last().unwrap().0, "190");
}

#[test]
fn list_functions_names_every_family() {
    let o = gpswarm(&["list-functions"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["sphere", "ackley", "rastrigin", "griewank", "rosenbrock", "schwefel", "expanded_schaffer_f6"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn help_lists_commands_and_flags() {
    let top = stdout(&gpswarm(&["--help"]));
    for cmd in ["run", "experiment", "significance", "illustrate", "list-functions"] {
        assert!(top.contains(cmd), "{cmd} missing from help");
    }
    let run = stdout(&gpswarm(&["run", "--help"]));
    for flag in ["--variant", "--function", "--budget", "--seed", "--refit-every", "--memory-cap", "--rho"] {
        assert!(run.contains(flag), "{flag} missing from run help");
    }
}
