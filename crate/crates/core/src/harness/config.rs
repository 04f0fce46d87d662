//! Experiment description, read from TOML or JSON.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bench::{BenchSpec, Family};
use crate::domain::Domain;
use crate::memory::MemoryConfig;
use crate::optimizer::{default_record_every, BallLaw, PsoParams, RunConfig, Variant};
use crate::rng::{fnv1a, splitmix64, Rng};

/// The bundled desk-scale experiment.
pub const DESK_SCALE_TOML: &str = include_str!("../../configs/desk_scale.toml");

fn default_runs() -> usize {
    20
}
fn default_budget_per_dim() -> usize {
    100
}
fn default_n_par() -> usize {
    50
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_budget_per_dim")]
    pub budget_per_dim: usize,
    #[serde(default = "default_n_par")]
    pub n_par: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub functions: Vec<FunctionConfig>,
    pub variants: Vec<VariantEntry>,
    /// Variant tested against every other one.
    #[serde(default)]
    pub reference: Option<String>,
    /// Student's equal-variance test instead of Welch's.
    #[serde(default)]
    pub pooled_variance: bool,
    #[serde(default)]
    pub refit_every: Option<usize>,
    #[serde(default)]
    pub memory_cap: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    /// `0` fits on the whole training set.
    #[serde(default)]
    pub fit_max_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainPreset {
    /// `[-100, 100]^D`, or `[-500, 500]^D` for Schwefel.
    #[default]
    Default,
    /// `[-5, 5]^D` for Ackley, Rastrigin and Rosenbrock, `[-600, 600]^D`
    /// for Griewank, otherwise the default.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub name: String,
    /// Output label; defaults to the name. Must be unique.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub domain: DomainPreset,
    /// Explicit `[lower, upper]` cube bounds, overriding `domain`.
    #[serde(default)]
    pub bounds: Option<[f64; 2]>,
    #[serde(default = "default_true")]
    pub shift: bool,
    #[serde(default = "default_true")]
    pub rotate: bool,
    #[serde(default)]
    pub offset: f64,
}

impl FunctionConfig {
    pub fn plain(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            domain: DomainPreset::Default,
            bounds: None,
            shift: false,
            rotate: false,
            offset: 0.0,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    /// The benchmark instance; shift and rotation depend only on
    /// `instance_seed`.
    pub fn spec(&self, dim: usize, instance_seed: u64) -> Result<BenchSpec, HarnessError> {
        let family: Family = self.name.parse().map_err(|e| HarnessError::Config(format!("{e}")))?;
        let (lo, hi) = match (self.bounds, self.domain) {
            (Some([lo, hi]), _) => (lo, hi),
            (None, DomainPreset::Default) => family.default_bounds(),
            (None, DomainPreset::Classical) => family.classical_bounds(),
        };
        let domain =
            Domain::cube(dim, lo, hi).map_err(|e| HarnessError::Config(format!("function '{}': {e}", self.label())))?;
        let mut spec = BenchSpec::new(&self.name, dim)
            .map_err(|e| HarnessError::Config(format!("{e}")))?
            .with_domain(domain)
            .with_offset(self.offset);
        let mut rng = Rng::new(instance_seed);
        if self.shift {
            spec = spec.with_random_shift(&mut rng);
        }
        if self.rotate {
            spec = spec.with_random_rotation(&mut rng);
        }
        Ok(spec)
    }
}

/// A variant given either by name or with coefficient overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariantEntry {
    Name(String),
    Detailed(VariantConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub variant: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub phi_p: Option<f64>,
    #[serde(default)]
    pub phi_g: Option<f64>,
    #[serde(default)]
    pub phi_h: Option<f64>,
    #[serde(default)]
    pub geometric_heuristic: Option<bool>,
    #[serde(default)]
    pub ball: Option<BallLaw>,
}

impl VariantEntry {
    fn as_config(&self) -> VariantConfig {
        match self {
            VariantEntry::Name(n) => VariantConfig {
                variant: n.clone(),
                label: None,
                omega: None,
                phi_p: None,
                phi_g: None,
                phi_h: None,
                geometric_heuristic: None,
                ball: None,
            },
            VariantEntry::Detailed(c) => c.clone(),
        }
    }
}

/// A variant with its resolved coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedVariant {
    pub label: String,
    pub params: PsoParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse { format: "TOML", message: e.to_string() })
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse { format: "JSON", message: e.to_string() })
    }

    /// The format follows the extension; anything but `.json` is read as
    /// TOML.
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json { Self::from_json(&text) } else { Self::from_toml(&text) };
        parsed.map_err(|e| match e {
            HarnessError::Parse { format, message } => {
                HarnessError::Parse { format, message: format!("{}: {message}", path.display()) }
            }
            other => other,
        })
    }

    pub fn desk_scale() -> Self {
        Self::from_toml(DESK_SCALE_TOML).expect("bundled config parses")
    }

    pub fn budget(&self) -> usize {
        self.budget_per_dim * self.dim
    }

    pub fn variants(&self) -> Result<Vec<ResolvedVariant>, HarnessError> {
        self.variants
            .iter()
            .map(|entry| {
                let c = entry.as_config();
                let variant: Variant = c.variant.parse().map_err(HarnessError::Config)?;
                let mut params = PsoParams::preset(variant, self.n_par);
                if let Some(v) = c.omega {
                    params.omega = v;
                }
                if let Some(v) = c.phi_p {
                    params.phi_p = v;
                }
                if let Some(v) = c.phi_g {
                    params.phi_g = v;
                }
                if let Some(v) = c.phi_h {
                    params.phi_h = v;
                }
                if let Some(v) = c.geometric_heuristic {
                    params.geometric_heuristic = v;
                }
                if let Some(v) = c.ball {
                    params.ball = v;
                }
                let label = c.label.unwrap_or_else(|| variant.name().to_string());
                Ok(ResolvedVariant { label, params })
            })
            .collect()
    }

    /// Per-run settings shared by every cell of the grid.
    pub fn run_config(&self, seed: u64, n_par: usize) -> RunConfig {
        let mut c = RunConfig::new(self.budget(), seed, n_par);
        if let Some(v) = self.refit_every {
            c.refit_every = v;
        }
        if let Some(v) = self.restarts {
            c.restarts = v;
        }
        c.record_every = self.record_every.unwrap_or_else(|| default_record_every(self.budget()));
        c.memory = MemoryConfig { rho: self.rho.unwrap_or(c.memory.rho), cap: self.memory_cap.unwrap_or(c.memory.cap) };
        c.fit_max_points = match self.fit_max_points {
            Some(0) => None,
            Some(m) => Some(m),
            None => c.fit_max_points,
        };
        c
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.runs == 0 {
            return bad("runs must be positive".into());
        }
        if self.budget_per_dim == 0 {
            return bad("budget_per_dim must be positive".into());
        }
        if self.functions.is_empty() {
            return bad("the function list is empty".into());
        }
        if self.variants.is_empty() {
            return bad("the variant list is empty".into());
        }
        let mut labels = HashSet::new();
        for f in &self.functions {
            if !labels.insert(f.label().to_string()) {
                return bad(format!("duplicate function label '{}'", f.label()));
            }
            f.spec(self.dim, 0)?;
        }
        let variants = self.variants()?;
        let mut labels = HashSet::new();
        for v in &variants {
            if !labels.insert(v.label.clone()) {
                return bad(format!("duplicate variant label '{}'", v.label));
            }
            let (cfg, min_points) = match v.params.variant {
                Variant::Bo => (self.run_config(0, 2 * self.dim + 1), 2 * self.dim + 1),
                _ => (self.run_config(0, v.params.n_par), v.params.n_par),
            };
            v.params.validate().map_err(|e| HarnessError::Config(format!("variant '{}': {e}", v.label)))?;
            cfg.validate(min_points).map_err(|e| HarnessError::Config(format!("variant '{}': {e}", v.label)))?;
        }
        if let Some(r) = &self.reference {
            if !labels.contains(r) {
                return bad(format!("reference variant '{r}' is not in the variant list"));
            }
        }
        Ok(())
    }
}

/// Seed of one run. It depends on the labels rather than grid positions, so
/// adding, removing or reordering grid entries leaves every other run intact.
pub fn run_seed(base_seed: u64, function: &str, variant: &str, run: usize) -> u64 {
    let key = format!("run\u{1f}{function}\u{1f}{variant}\u{1f}{run}");
    splitmix64(base_seed ^ fnv1a(key.as_bytes()))
}

/// Seed of a function's shift and rotation, shared by all its runs.
pub fn instance_seed(base_seed: u64, function: &str) -> u64 {
    let key = format!("instance\u{1f}{function}");
    splitmix64(base_seed ^ fnv1a(key.as_bytes()))
}
