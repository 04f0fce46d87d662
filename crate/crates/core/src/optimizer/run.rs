use serde::{Deserialize, Serialize};

use super::steps::{self, BudgetExhausted};
use super::swarm::{Evaluator, Particle, SwarmState, TracePoint};
use super::{PsoParams, RunConfig, RunError, Variant};
use crate::domain::{uniform_in_domain, Domain};
use crate::gp::{self, Acquisition, GpModel, KernelParams, LCB_MULTIPLIER};
use crate::memory::{Memory, Observation};
use crate::objective::Objective;
use crate::rng::Rng;

/// Stream labels split from the run seed.
pub(crate) const SWARM_STREAM: u64 = 1;
pub(crate) const MODEL_STREAM: u64 = 2;
pub(crate) const SEARCH_STREAM: u64 = 3;

/// What happened in one iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub iteration: usize,
    /// Evaluations used after the iteration.
    pub evaluations: usize,
    pub memory_size: usize,
    pub training_size: usize,
    /// Hyperparameters were re-estimated this iteration.
    pub refit: bool,
    /// The likelihood search failed; previous parameters were reused if any.
    pub fit_failed: bool,
    /// No usable surrogate; the fallback kinematics were used.
    pub fallback: bool,
    pub jitter_steps: u32,
}

/// Outcome of one optimizer run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub function: String,
    pub variant: Variant,
    pub seed: u64,
    pub budget: usize,
    pub trace: Vec<TracePoint>,
    pub best_value: f64,
    pub best_position: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub diagnostics: Vec<IterationDiagnostics>,
}

impl RunRecord {
    /// Total jitter escalation steps over the run.
    pub fn jitter_total(&self) -> u32 {
        self.diagnostics.iter().map(|d| d.jitter_steps).sum()
    }
}

/// Surrogate prepared for the coming iteration.
pub struct Prepared {
    pub model: GpModel,
    /// Heuristic direction or relocation target.
    pub target: Vec<f64>,
}

/// A swarm run that can be driven one iteration at a time.
pub struct SwarmRun<'a> {
    domain: &'a Domain,
    params: PsoParams,
    cfg: RunConfig,
    seed: u64,
    swarm_rng: Rng,
    model_rng: Rng,
    search_rng: Rng,
    eval: Evaluator<'a>,
    state: SwarmState,
    kernel: Option<KernelParams>,
    prepared: Option<Prepared>,
    pending: IterationDiagnostics,
    diagnostics: Vec<IterationDiagnostics>,
    finished: bool,
    function: String,
}

impl<'a> SwarmRun<'a> {
    /// Validates the configuration, scatters the swarm uniformly over the
    /// domain with normal velocities, and evaluates it.
    pub fn new(
        objective: &'a Objective,
        domain: &'a Domain,
        params: PsoParams,
        cfg: RunConfig,
    ) -> Result<Self, RunError> {
        params.validate()?;
        cfg.validate(params.n_par)?;
        if params.variant == Variant::Bo {
            return Err(RunError::Config("the BO baseline is not a swarm variant; use run_bo_baseline".into()));
        }
        if objective.dim() != domain.dim() {
            return Err(RunError::Config(format!(
                "objective dimension {} does not match domain dimension {}",
                objective.dim(),
                domain.dim()
            )));
        }
        let root = Rng::new(cfg.seed);
        let mut swarm_rng = root.split(SWARM_STREAM);
        let mut eval = Evaluator::new(objective, cfg.budget, cfg.record_every);
        let mut particles = Vec::with_capacity(params.n_par);
        for _ in 0..params.n_par {
            let x = uniform_in_domain(&mut swarm_rng, domain);
            let v: Vec<f64> = (0..domain.dim()).map(|i| 0.1 * domain.width(i) * swarm_rng.standard_normal()).collect();
            let (id, value) = eval.eval(&x).expect("budget covers the initial swarm");
            particles.push(Particle {
                best_position: x.clone(),
                best_value: value,
                position: x,
                velocity: v,
                value,
                eval_id: id,
            });
        }
        let mut state = SwarmState::new(particles);
        if params.variant.uses_surrogate() {
            state.memory = Memory::from_initial(state.observations());
        }
        Ok(Self {
            domain,
            seed: cfg.seed,
            swarm_rng,
            model_rng: root.split(MODEL_STREAM),
            search_rng: root.split(SEARCH_STREAM),
            eval,
            state,
            kernel: None,
            prepared: None,
            pending: IterationDiagnostics::default(),
            diagnostics: Vec::new(),
            finished: false,
            function: objective.name().to_string(),
            params,
            cfg,
        })
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }

    pub fn evaluations(&self) -> usize {
        self.eval.used()
    }

    pub fn is_finished(&self) -> bool {
        self.finished || self.eval.exhausted()
    }

    pub fn best_so_far(&self) -> f64 {
        self.eval.best_value()
    }

    /// Fits the surrogate on memory ∪ current swarm and computes the
    /// variant's target, once per iteration. `None` for the plain swarm
    /// variants or when no surrogate could be built.
    pub fn prepare(&mut self) -> Option<&Prepared> {
        if !self.params.variant.uses_surrogate() {
            return None;
        }
        if self.prepared.is_none() {
            self.prepared = self.build_surrogate();
        }
        self.prepared.as_ref()
    }

    fn build_surrogate(&mut self) -> Option<Prepared> {
        let current = self.state.observations();
        let (x, y) = self.state.memory.training_set(&current);
        self.pending.training_size = x.len();
        self.pending.memory_size = self.state.memory.len();

        // Kernel parameters live in standardized units of the full training set.
        let (shift, scale) = gp::standardization(&y);
        let due = self.kernel.is_none() || self.state.iteration.is_multiple_of(self.cfg.refit_every);
        if due {
            self.pending.refit = true;
            let (fx, fy) = fit_subset(&x, &y, self.cfg.fit_max_points);
            let z: Vec<f64> = fy.iter().map(|v| (v - shift) / scale).collect();
            match gp::fit_hyperparams(&mut self.model_rng, &fx, &z, self.domain, self.cfg.restarts) {
                Ok(out) => self.kernel = Some(out.params),
                Err(_) => self.pending.fit_failed = true,
            }
        }
        let params = self.kernel?;
        let model = match GpModel::with_transform(params, x, y, shift, scale) {
            Ok(m) => m,
            Err(_) => return None,
        };
        self.pending.jitter_steps = model.jitter_steps();
        let target = self.target_for(&model);
        Some(Prepared { model, target })
    }

    fn target_for(&mut self, model: &GpModel) -> Vec<f64> {
        let g = self.state.global_best_position.clone();
        match self.params.variant {
            Variant::A1 | Variant::A2 | Variant::A3 | Variant::B => {
                gp::surrogate_argmin(model, self.domain, Acquisition::Mean, &g)
            }
            Variant::C1 => gp::surrogate_argmin(model, self.domain, Acquisition::Lcb(LCB_MULTIPLIER), &g),
            Variant::C2 => {
                let start = gp::variance_scan_start(model, self.domain, &mut self.search_rng);
                gp::surrogate_argmin(model, self.domain, Acquisition::MaxVar, &start)
            }
            Variant::Opso | Variant::Spso2011 | Variant::Bo => unreachable!("no surrogate target"),
        }
    }

    /// Runs one iteration. Returns `false` once the budget is exhausted.
    pub fn step(&mut self) -> bool {
        if self.is_finished() {
            self.finished = true;
            return false;
        }
        self.prepare();
        let prepared = self.prepared.take();
        let first_new = self.eval.used() as u64;
        let p = &self.params;
        let (st, dom, rng, ev) = (&mut self.state, self.domain, &mut self.swarm_rng, &mut self.eval);

        let outcome: Result<(), BudgetExhausted> = match (p.variant, prepared.as_ref()) {
            (Variant::Opso, _) => steps::step_opso(st, p, dom, rng, ev),
            (Variant::Spso2011, _) => steps::step_spso2011(st, p, dom, rng, ev),
            (Variant::A1 | Variant::A2 | Variant::A3, Some(pr)) => {
                steps::step_variant_a(st, p, dom, rng, ev, &pr.target)
            }
            (Variant::A1 | Variant::A2 | Variant::A3, None) => {
                self.pending.fallback = true;
                steps::step_opso(st, p, dom, rng, ev)
            }
            (Variant::B | Variant::C1 | Variant::C2, Some(pr)) => {
                steps::step_relocate(st, p, dom, rng, ev, &pr.target).map(|_| ())
            }
            (Variant::B | Variant::C1 | Variant::C2, None) => {
                self.pending.fallback = true;
                steps::step_spso2011(st, p, dom, rng, ev)
            }
            (Variant::Bo, _) => unreachable!("rejected in SwarmRun::new"),
        };

        if let Some(pr) = prepared.as_ref() {
            let fresh: Vec<Observation> =
                self.state.particles.iter().filter(|q| q.eval_id >= first_new).map(Particle::observation).collect();
            self.state.memory.update(&pr.model, &self.cfg.memory, &fresh);
        }
        self.state.iteration += 1;
        let mut diag = std::mem::take(&mut self.pending);
        diag.iteration = self.state.iteration;
        diag.evaluations = self.eval.used();
        diag.memory_size = self.state.memory.len();
        self.diagnostics.push(diag);
        if outcome.is_err() || self.eval.exhausted() {
            self.finished = true;
        }
        !self.finished
    }

    pub fn finish(mut self) -> RunRecord {
        while self.step() {}
        let iterations = self.state.iteration;
        let (trace, best_value, best_position, evaluations, wall) = self.eval.into_parts();
        RunRecord {
            function: self.function,
            variant: self.params.variant,
            seed: self.seed,
            budget: self.cfg.budget,
            trace,
            best_value,
            best_position,
            evaluations,
            iterations,
            wall_time_s: wall,
            diagnostics: self.diagnostics,
        }
    }
}

/// Keeps the `max` most recent observations (training sets list memory
/// first, in insertion order, then the current swarm).
fn fit_subset(x: &[Vec<f64>], y: &[f64], max: Option<usize>) -> (Vec<Vec<f64>>, Vec<f64>) {
    match max {
        Some(m) if x.len() > m => (x[x.len() - m..].to_vec(), y[y.len() - m..].to_vec()),
        _ => (x.to_vec(), y.to_vec()),
    }
}

/// Runs a swarm variant until the budget is exhausted.
pub fn run(objective: &Objective, domain: &Domain, params: &PsoParams, cfg: &RunConfig) -> Result<RunRecord, RunError> {
    Ok(SwarmRun::new(objective, domain, params.clone(), cfg.clone())?.finish())
}
