//! Particle swarm variants with and without a surrogate, plus a sequential
//! Bayesian-optimization baseline.

mod bo;
mod params;
mod run;
pub mod steps;
mod swarm;

pub use bo::{run_bo_baseline, BO_RANDOM_STARTS};
pub use params::{default_record_every, BallLaw, PsoParams, RunConfig, Variant};
pub use run::{run, IterationDiagnostics, Prepared, RunRecord, SwarmRun};
pub use swarm::{Evaluator, Particle, SwarmState, TracePoint};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Dispatches to the swarm loop or the BO baseline.
pub fn run_variant(
    objective: &crate::objective::Objective,
    domain: &crate::domain::Domain,
    params: &PsoParams,
    cfg: &RunConfig,
) -> Result<RunRecord, RunError> {
    match params.variant {
        Variant::Bo => run_bo_baseline(objective, domain, cfg),
        _ => run(objective, domain, params, cfg),
    }
}
