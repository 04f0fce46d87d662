use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::memory::{Memory, Observation};
use crate::objective::Objective;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Objective value at `position`.
    pub value: f64,
    /// Evaluation id of `position`.
    pub eval_id: u64,
    pub best_position: Vec<f64>,
    pub best_value: f64,
}

impl Particle {
    pub fn observation(&self) -> Observation {
        Observation { id: self.eval_id, point: self.position.clone(), value: self.value }
    }
}

#[derive(Clone, Debug)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_value: f64,
    /// Particle whose personal best is the global best.
    pub global_best_index: usize,
    pub memory: Memory,
    pub iteration: usize,
}

impl SwarmState {
    pub fn new(particles: Vec<Particle>) -> Self {
        assert!(!particles.is_empty());
        let mut s = Self {
            global_best_position: particles[0].best_position.clone(),
            global_best_value: particles[0].best_value,
            global_best_index: 0,
            particles,
            memory: Memory::default(),
            iteration: 0,
        };
        s.refresh_global_best();
        s
    }

    /// Recomputes the global best as the minimum over personal bests; ties
    /// keep the lowest index.
    pub fn refresh_global_best(&mut self) {
        let mut idx = 0;
        for (j, p) in self.particles.iter().enumerate() {
            if p.best_value < self.particles[idx].best_value {
                idx = j;
            }
        }
        self.global_best_index = idx;
        self.global_best_value = self.particles[idx].best_value;
        self.global_best_position = self.particles[idx].best_position.clone();
    }

    pub(crate) fn offer_global(&mut self, j: usize) {
        if self.particles[j].best_value < self.global_best_value {
            self.global_best_value = self.particles[j].best_value;
            self.global_best_position = self.particles[j].best_position.clone();
            self.global_best_index = j;
        }
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.particles.iter().map(Particle::observation).collect()
    }

    /// Index of the particle with the highest current value; ties keep the
    /// lowest index.
    pub fn worst_index(&self) -> usize {
        let mut idx = 0;
        for (j, p) in self.particles.iter().enumerate() {
            if p.value > self.particles[idx].value {
                idx = j;
            }
        }
        idx
    }
}

/// One sample of the best-so-far curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluations: usize,
    pub best_so_far: f64,
    pub elapsed_seconds: f64,
}

/// Budgeted access to the objective with best-so-far bookkeeping.
pub struct Evaluator<'a> {
    objective: &'a Objective,
    budget: usize,
    used: usize,
    record_every: usize,
    best_value: f64,
    best_position: Vec<f64>,
    trace: Vec<TracePoint>,
    start: Instant,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a Objective, budget: usize, record_every: usize) -> Self {
        Self {
            objective,
            budget,
            used: 0,
            record_every: record_every.max(1),
            best_value: f64::INFINITY,
            best_position: Vec::new(),
            trace: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    pub fn elapsed_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Evaluates `x` if budget remains, returning `(eval_id, value)`.
    pub fn eval(&mut self, x: &[f64]) -> Option<(u64, f64)> {
        if self.exhausted() {
            return None;
        }
        let v = self.objective.eval(x);
        let id = self.used as u64;
        self.used += 1;
        if v < self.best_value || self.best_position.is_empty() {
            self.best_value = v;
            self.best_position = x.to_vec();
        }
        if self.used.is_multiple_of(self.record_every) || self.used == self.budget {
            self.trace.push(TracePoint {
                evaluations: self.used,
                best_so_far: self.best_value,
                elapsed_seconds: self.elapsed_seconds(),
            });
        }
        Some((id, v))
    }

    pub(crate) fn into_parts(self) -> (Vec<TracePoint>, f64, Vec<f64>, usize, f64) {
        let elapsed = self.elapsed_seconds();
        (self.trace, self.best_value, self.best_position, self.used, elapsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluator_respects_budget_and_records() {
        let f = Objective::new("lin", 1, |x| -x[0]);
        let mut e = Evaluator::new(&f, 5, 2);
        for i in 0..7 {
            let r = e.eval(&[i as f64]);
            assert_eq!(r.is_some(), i < 5);
        }
        assert_eq!(f.eval_count(), 5);
        let evals: Vec<usize> = e.trace().iter().map(|t| t.evaluations).collect();
        assert_eq!(evals, vec![2, 4, 5]);
        assert_eq!(e.best_value(), -4.0);
    }

    #[test]
    fn worst_and_global_best() {
        let mk = |v: f64, b: f64| Particle {
            position: vec![v],
            velocity: vec![0.0],
            value: v,
            eval_id: 0,
            best_position: vec![b],
            best_value: b,
        };
        let s = SwarmState::new(vec![mk(3.0, 1.0), mk(5.0, -2.0), mk(5.0, 0.0)]);
        assert_eq!(s.worst_index(), 1);
        assert_eq!(s.global_best_index, 1);
        assert_eq!(s.global_best_value, -2.0);
    }
}
