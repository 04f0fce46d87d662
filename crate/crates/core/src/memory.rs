//! Greedy retention of informative observations.
//!
//! An observation is informative when its value falls outside the
//! `μ ± ρσ` band of the current surrogate; everything the model already
//! predicts well is forgotten. The current swarm is always handed to the
//! next fit separately (see [`Memory::training_set`]), so only selected
//! points persist here.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::gp::GpModel;

/// Two-sided 75% band.
pub const DEFAULT_RHO: f64 = 1.15;
/// Default cap, as a multiple of the swarm size.
pub const DEFAULT_CAP_PER_PARTICLE: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    pub rho: f64,
    pub cap: usize,
}

impl MemoryConfig {
    pub fn for_swarm(n_par: usize) -> Self {
        Self { rho: DEFAULT_RHO, cap: DEFAULT_CAP_PER_PARTICLE * n_par }
    }

    pub fn validate(&self, n_par: usize) -> Result<(), String> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(format!("memory rho must be positive, got {}", self.rho));
        }
        if self.cap < n_par {
            return Err(format!("memory cap {} is below the swarm size {n_par}", self.cap));
        }
        Ok(())
    }
}

/// One objective evaluation. `id` is unique within a run and is what the
/// nugget identity test and de-duplication key on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: u64,
    pub point: Vec<f64>,
    pub value: f64,
}

/// `true` when `value ∉ [μ - ρσ, μ + ρσ]`.
pub fn is_informative(model: &GpModel, rho: f64, obs: &Observation) -> bool {
    let (mu, var) = model.predict(&obs.point);
    let half = rho * var.sqrt();
    obs.value < mu - half || obs.value > mu + half
}

pub fn select_informative(model: &GpModel, cfg: &MemoryConfig, batch: &[Observation]) -> Vec<Observation> {
    batch.iter().filter(|o| is_informative(model, cfg.rho, o)).cloned().collect()
}

/// `|f(x) - μ(x)| / σ(x)`; infinite for a nonzero residual at `σ = 0`.
pub fn surprise(model: &GpModel, obs: &Observation) -> f64 {
    let (mu, var) = model.predict(&obs.point);
    let r = (obs.value - mu).abs();
    if r == 0.0 {
        0.0
    } else {
        r / var.sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryUpdate {
    pub added: usize,
    pub evicted: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Memory {
    entries: Vec<Observation>,
}

impl Memory {
    /// The initial memory is the whole initial swarm.
    pub fn from_initial(obs: Vec<Observation>) -> Self {
        let mut m = Memory::default();
        for o in obs {
            m.insert(o);
        }
        m
    }

    pub fn entries(&self) -> &[Observation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    fn insert(&mut self, o: Observation) -> bool {
        if self.contains(o.id) {
            return false;
        }
        self.entries.push(o);
        true
    }

    /// Adds the informative part of `batch`, then evicts the least
    /// surprising entries while above the cap.
    pub fn update(&mut self, model: &GpModel, cfg: &MemoryConfig, batch: &[Observation]) -> MemoryUpdate {
        let mut added = 0;
        for o in select_informative(model, cfg, batch) {
            if self.insert(o) {
                added += 1;
            }
        }
        let excess = self.entries.len().saturating_sub(cfg.cap);
        if excess > 0 {
            let scores: Vec<f64> = self.entries.iter().map(|e| surprise(model, e)).collect();
            let mut order: Vec<usize> = (0..self.entries.len()).collect();
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
            let drop: HashSet<usize> = order[..excess].iter().copied().collect();
            let mut i = 0;
            self.entries.retain(|_| {
                let keep = !drop.contains(&i);
                i += 1;
                keep
            });
        }
        MemoryUpdate { added, evicted: excess }
    }

    /// `memory ∪ current`, de-duplicated by id; memory entries first.
    pub fn training_set(&self, current: &[Observation]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut seen: HashSet<u64> = HashSet::with_capacity(self.entries.len() + current.len());
        let mut x = Vec::with_capacity(self.entries.len() + current.len());
        let mut y = Vec::with_capacity(x.capacity());
        for o in self.entries.iter().chain(current) {
            if seen.insert(o.id) {
                x.push(o.point.clone());
                y.push(o.value);
            }
        }
        (x, y)
    }
}
