use super::run::{IterationDiagnostics, RunRecord, MODEL_STREAM, SEARCH_STREAM, SWARM_STREAM};
use super::swarm::Evaluator;
use super::{RunConfig, RunError, Variant};
use crate::domain::{uniform_in_domain, Domain};
use crate::gp::{self, Acquisition, GpModel, KernelParams, LCB_MULTIPLIER};
use crate::memory::{Memory, Observation};
use crate::objective::Objective;
use crate::rng::Rng;

/// Uniform restarts of the acquisition search besides the incumbent.
pub const BO_RANDOM_STARTS: usize = 8;

/// Sequential lower-confidence-bound minimization.
///
/// Starts from `2·dim + 1` uniform points, then evaluates one LCB minimizer
/// per iteration. The training set is the informative-point memory plus the
/// latest observation, with the same retention rule as the swarm variants.
pub fn run_bo_baseline(objective: &Objective, domain: &Domain, cfg: &RunConfig) -> Result<RunRecord, RunError> {
    let dim = domain.dim();
    let n_init = 2 * dim + 1;
    cfg.validate(n_init)?;
    if objective.dim() != dim {
        return Err(RunError::Config(format!(
            "objective dimension {} does not match domain dimension {dim}",
            objective.dim()
        )));
    }
    let root = Rng::new(cfg.seed);
    let mut design_rng = root.split(SWARM_STREAM);
    let mut model_rng = root.split(MODEL_STREAM);
    let mut search_rng = root.split(SEARCH_STREAM);
    let mut eval = Evaluator::new(objective, cfg.budget, cfg.record_every);

    let mut initial = Vec::with_capacity(n_init);
    for _ in 0..n_init {
        let x = uniform_in_domain(&mut design_rng, domain);
        let (id, value) = eval.eval(&x).expect("budget covers the initial design");
        initial.push(Observation { id, point: x, value });
    }
    let mut latest = initial.last().cloned().expect("non-empty design");
    let mut memory = Memory::from_initial(initial);
    let mut kernel: Option<KernelParams> = None;
    let mut diagnostics = Vec::new();
    let mut iteration = 0;

    while !eval.exhausted() {
        let mut diag = IterationDiagnostics::default();
        let (x, y) = memory.training_set(std::slice::from_ref(&latest));
        diag.training_size = x.len();
        let (shift, scale) = gp::standardization(&y);
        if kernel.is_none() || iteration % cfg.refit_every == 0 {
            diag.refit = true;
            let skip = cfg.fit_max_points.map_or(0, |m| x.len().saturating_sub(m));
            let z: Vec<f64> = y[skip..].iter().map(|v| (v - shift) / scale).collect();
            match gp::fit_hyperparams(&mut model_rng, &x[skip..], &z, domain, cfg.restarts) {
                Ok(out) => kernel = Some(out.params),
                Err(_) => diag.fit_failed = true,
            }
        }
        let model = kernel.and_then(|p| GpModel::with_transform(p, x, y, shift, scale).ok());
        let next = match &model {
            Some(m) => {
                diag.jitter_steps = m.jitter_steps();
                lcb_minimizer(m, domain, eval.best_position(), &mut search_rng)
            }
            None => {
                diag.fallback = true;
                uniform_in_domain(&mut search_rng, domain)
            }
        };
        let (id, value) = eval.eval(&next).expect("loop guard checks the budget");
        latest = Observation { id, point: next, value };
        if let Some(m) = &model {
            memory.update(m, &cfg.memory, std::slice::from_ref(&latest));
        }
        iteration += 1;
        diag.iteration = iteration;
        diag.evaluations = eval.used();
        diag.memory_size = memory.len();
        diagnostics.push(diag);
    }

    let (trace, best_value, best_position, evaluations, wall) = eval.into_parts();
    Ok(RunRecord {
        function: objective.name().to_string(),
        variant: Variant::Bo,
        seed: cfg.seed,
        budget: cfg.budget,
        trace,
        best_value,
        best_position,
        evaluations,
        iterations: iteration,
        wall_time_s: wall,
        diagnostics,
    })
}

fn lcb_minimizer(model: &GpModel, domain: &Domain, incumbent: &[f64], rng: &mut Rng) -> Vec<f64> {
    let acq = Acquisition::Lcb(LCB_MULTIPLIER);
    let mut best = gp::surrogate_argmin(model, domain, acq, incumbent);
    let mut best_value = acq.value(model, &best);
    for _ in 0..BO_RANDOM_STARTS {
        let start = uniform_in_domain(rng, domain);
        let cand = gp::surrogate_argmin(model, domain, acq, &start);
        let v = acq.value(model, &cand);
        if v < best_value {
            best = cand;
            best_value = v;
        }
    }
    best
}
