use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::gp::DEFAULT_RESTARTS;
use crate::memory::MemoryConfig;

/// Algorithm family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Original PSO: componentwise-uniform mixing.
    Opso,
    /// Hyperspherical sampling around the center of gravity.
    Spso2011,
    /// Heuristic direction toward the surrogate-mean minimum.
    A1,
    A2,
    A3,
    /// Relocates the worst particle to the surrogate-mean minimum.
    B,
    /// Relocates the worst particle to the lower-confidence-bound minimum.
    C1,
    /// Relocates the worst particle to the point of maximal uncertainty.
    C2,
    /// Sequential Bayesian optimization baseline.
    Bo,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Opso,
        Variant::Spso2011,
        Variant::A1,
        Variant::A2,
        Variant::A3,
        Variant::B,
        Variant::C1,
        Variant::C2,
        Variant::Bo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Opso => "opso",
            Variant::Spso2011 => "spso2011",
            Variant::A1 => "a1",
            Variant::A2 => "a2",
            Variant::A3 => "a3",
            Variant::B => "b",
            Variant::C1 => "c1",
            Variant::C2 => "c2",
            Variant::Bo => "bo",
        }
    }

    /// Whether the variant fits a surrogate during a swarm run.
    pub fn uses_surrogate(self) -> bool {
        !matches!(self, Variant::Opso | Variant::Spso2011)
    }

    pub fn is_heuristic_direction(self) -> bool {
        matches!(self, Variant::A1 | Variant::A2 | Variant::A3)
    }

    pub fn is_relocation(self) -> bool {
        matches!(self, Variant::B | Variant::C1 | Variant::C2)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == lower)
            .ok_or_else(|| format!("unknown variant '{s}' (expected one of: {})", variant_names()))
    }
}

fn variant_names() -> String {
    Variant::ALL.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ")
}

/// Distribution of the hyperspherical sample in SPSO2011-style moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallLaw {
    /// Uniform direction and uniform distance from the center.
    #[default]
    Radial,
    /// Uniform over the ball's volume.
    Volume,
}

impl FromStr for BallLaw {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "radial" => Ok(BallLaw::Radial),
            "volume" => Ok(BallLaw::Volume),
            _ => Err(format!("unknown ball law '{s}' (expected radial or volume)")),
        }
    }
}

/// Swarm coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub variant: Variant,
    pub n_par: usize,
    /// Inertia ω.
    pub omega: f64,
    /// Cognitive weight φ_p.
    pub phi_p: f64,
    /// Social weight φ_g.
    pub phi_g: f64,
    /// Heuristic weight φ_h (A variants only).
    pub phi_h: f64,
    /// Fold the heuristic influence into the SPSO2011 center of gravity
    /// (denominator 4) instead of the componentwise rule. A variants only.
    #[serde(default)]
    pub geometric_heuristic: bool,
    /// Sampling law of the hyperspherical step.
    #[serde(default)]
    pub ball: BallLaw,
}

impl PsoParams {
    /// Published coefficient presets. OPSO uses the classic ω = 1, φ = 2.
    pub fn preset(variant: Variant, n_par: usize) -> Self {
        let spso_omega = 1.0 / (2.0 * std::f64::consts::LN_2);
        let spso_phi = 0.5 + std::f64::consts::LN_2;
        let (omega, phi_p, phi_g, phi_h) = match variant {
            Variant::Opso => (1.0, 2.0, 2.0, 0.0),
            Variant::Spso2011 | Variant::Bo => (spso_omega, spso_phi, spso_phi, 0.0),
            Variant::A1 => (0.42, 1.2, 1.2, 0.75),
            Variant::A2 => (0.42, 1.55, 0.75, 0.75),
            Variant::A3 => (0.42, 0.75, 1.55, 0.75),
            Variant::B | Variant::C1 | Variant::C2 => (0.42, 1.55, 1.55, 0.0),
        };
        Self { variant, n_par, omega, phi_p, phi_g, phi_h, geometric_heuristic: false, ball: BallLaw::Radial }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.n_par == 0 {
            return Err(RunError::Config("n_par must be positive".into()));
        }
        for (name, v) in [("phi_p", self.phi_p), ("phi_g", self.phi_g), ("phi_h", self.phi_h)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RunError::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.omega.is_finite() {
            return Err(RunError::Config("omega must be finite".into()));
        }
        Ok(())
    }
}

/// Per-run settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Maximum objective evaluations.
    pub budget: usize,
    pub seed: u64,
    pub memory: MemoryConfig,
    /// Kernel hyperparameters are re-estimated every this many iterations;
    /// the posterior is rebuilt every iteration.
    pub refit_every: usize,
    /// Trace granularity in evaluations.
    pub record_every: usize,
    /// Random restarts of the likelihood search.
    pub restarts: usize,
    /// Largest training set used for the likelihood search; the most
    /// recent observations are kept. `None` fits on everything.
    pub fit_max_points: Option<usize>,
}

impl RunConfig {
    pub const DEFAULT_REFIT_EVERY: usize = 5;
    pub const DEFAULT_FIT_MAX_POINTS: usize = 100;

    pub fn new(budget: usize, seed: u64, n_par: usize) -> Self {
        Self {
            budget,
            seed,
            memory: MemoryConfig::for_swarm(n_par),
            refit_every: Self::DEFAULT_REFIT_EVERY,
            record_every: default_record_every(budget),
            restarts: DEFAULT_RESTARTS,
            fit_max_points: Some(Self::DEFAULT_FIT_MAX_POINTS),
        }
    }

    pub fn validate(&self, n_par: usize) -> Result<(), RunError> {
        if self.budget < n_par {
            return Err(RunError::Config(format!("budget {} cannot hold the initial swarm of {n_par}", self.budget)));
        }
        if self.refit_every == 0 || self.record_every == 0 || self.restarts == 0 {
            return Err(RunError::Config("refit_every, record_every and restarts must be positive".into()));
        }
        if self.fit_max_points.is_some_and(|m| m < 2) {
            return Err(RunError::Config("fit_max_points must be at least 2".into()));
        }
        self.memory.validate(n_par).map_err(RunError::Config)
    }
}

/// One evaluation for budgets up to 10⁴, else ten.
pub fn default_record_every(budget: usize) -> usize {
    if budget <= 10_000 {
        1
    } else {
        10
    }
}
