//! Snapshot dump of a small two-dimensional run for plotting.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bench::{make_function, BenchSpec};
use crate::domain::Domain;
use crate::gp::{Acquisition, LCB_MULTIPLIER};
use crate::optimizer::{PsoParams, RunConfig, SwarmRun, Variant};

/// Iterations after which a snapshot is written.
pub const SNAPSHOT_ITERATIONS: [usize; 3] = [0, 6, 18];
/// Grid points per axis.
pub const GRID_SIZE: usize = 64;

#[derive(Clone, Debug)]
pub struct IllustrateOptions {
    pub seed: u64,
    pub n_par: usize,
    pub budget: usize,
}

impl IllustrateOptions {
    /// Ten particles and 190 evaluations: the initial swarm plus 18 full
    /// iterations.
    pub fn new(seed: u64) -> Self {
        Self { seed, n_par: 10, budget: 190 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub evaluations: usize,
    pub incumbent_position: Vec<f64>,
    pub incumbent_value: f64,
    /// Relocation target for the next iteration, if a surrogate was built.
    pub target: Option<Vec<f64>>,
    pub target_acquisition: Option<f64>,
    pub directory: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IllustrateReport {
    pub seed: u64,
    pub final_best: f64,
    pub evaluations: usize,
    pub snapshots: Vec<Snapshot>,
    /// Best-so-far trace of the whole run.
    pub trace: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Runs the lower-confidence-bound relocation variant on 2-D Ackley over
/// `[-5, 5]²` and writes `iter_NN/` directories with the particles, the
/// surrogate on a 64×64 grid, and the incumbent and target, plus the
/// run's `trace.csv`.
pub fn illustrate(out_dir: &Path, opts: &IllustrateOptions) -> Result<IllustrateReport, HarnessError> {
    let domain = Domain::cube(2, -5.0, 5.0).expect("valid box");
    let spec = BenchSpec::new("ackley", 2).expect("registered").with_domain(domain.clone());
    let objective = make_function(spec.clone()).expect("valid spec");
    let params = PsoParams::preset(Variant::C1, opts.n_par);
    let cfg = RunConfig::new(opts.budget, opts.seed, opts.n_par);
    let mut run = SwarmRun::new(&objective, &domain, params, cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let acq = Acquisition::Lcb(LCB_MULTIPLIER);

    let mut snapshots = Vec::new();
    let last = *SNAPSHOT_ITERATIONS.last().expect("non-empty");
    loop {
        let it = run.state().iteration;
        if SNAPSHOT_ITERATIONS.contains(&it) {
            let dir = out_dir.join(format!("iter_{it:02}"));
            fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;

            let mut particles = String::from("particle,x,y,value,best_x,best_y,best_value\n");
            for (j, p) in run.state().particles.iter().enumerate() {
                particles.push_str(&format!(
                    "{j},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                    p.position[0], p.position[1], p.value, p.best_position[0], p.best_position[1], p.best_value
                ));
            }
            write(&dir.join("particles.csv"), &particles)?;

            let incumbent_position = run.state().global_best_position.clone();
            let incumbent_value = run.state().global_best_value;
            let evaluations = run.evaluations();
            let prepared = run.prepare();
            let mut grid = String::from("x,y,objective,mean,variance,acquisition\n");
            for iy in 0..GRID_SIZE {
                for ix in 0..GRID_SIZE {
                    let x = grid_coord(&domain, 0, ix);
                    let y = grid_coord(&domain, 1, iy);
                    let f = spec.eval(&[x, y]);
                    let (m, v, a) = match prepared {
                        Some(pr) => {
                            let (m, v) = pr.model.predict(&[x, y]);
                            (m, v, acq.value(&pr.model, &[x, y]))
                        }
                        None => (f64::NAN, f64::NAN, f64::NAN),
                    };
                    grid.push_str(&format!("{x:e},{y:e},{f:e},{m:e},{v:e},{a:e}\n"));
                }
            }
            write(&dir.join("grid.csv"), &grid)?;

            let target = prepared.map(|pr| pr.target.clone());
            let target_acquisition = prepared.map(|pr| acq.value(&pr.model, &pr.target));
            let snap = Snapshot {
                iteration: it,
                evaluations,
                incumbent_position,
                incumbent_value,
                target,
                target_acquisition,
                directory: dir.clone(),
            };
            let json = serde_json::to_string_pretty(&snap).expect("snapshot serializes");
            write(&dir.join("snapshot.json"), &json)?;
            snapshots.push(snap);
        }
        if it >= last || run.is_finished() {
            break;
        }
        run.step();
    }
    let record = run.finish();
    let mut trace = String::from("function,variant,seed,evaluations,best_so_far,elapsed_seconds\n");
    for t in &record.trace {
        trace.push_str(&format!(
            "ackley,c1,{},{},{:e},{:.6}\n",
            opts.seed, t.evaluations, t.best_so_far, t.elapsed_seconds
        ));
    }
    let trace_path = out_dir.join("trace.csv");
    write(&trace_path, &trace)?;
    Ok(IllustrateReport {
        seed: opts.seed,
        final_best: record.best_value,
        evaluations: record.evaluations,
        snapshots,
        trace: trace_path,
    })
}

fn grid_coord(d: &Domain, axis: usize, i: usize) -> f64 {
    d.lower()[axis] + d.width(axis) * i as f64 / (GRID_SIZE - 1) as f64
}
