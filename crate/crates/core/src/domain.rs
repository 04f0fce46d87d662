use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("domain must have at least one dimension")]
    Empty,
    #[error("bound vectors differ in length ({lower} vs {upper})")]
    LengthMismatch { lower: usize, upper: usize },
    #[error("axis {axis}: lower bound {lower} is not below upper bound {upper}")]
    InvalidAxis { axis: usize, lower: f64, upper: f64 },
}

/// Axis-aligned search box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawDomain> for Domain {
    type Error = DomainError;
    fn try_from(raw: RawDomain) -> Result<Self, Self::Error> {
        Domain::new(raw.lower, raw.upper)
    }
}

impl From<Domain> for RawDomain {
    fn from(d: Domain) -> Self {
        RawDomain { lower: d.lower, upper: d.upper }
    }
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DomainError> {
        if lower.len() != upper.len() {
            return Err(DomainError::LengthMismatch { lower: lower.len(), upper: upper.len() });
        }
        if lower.is_empty() {
            return Err(DomainError::Empty);
        }
        for (axis, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // NaN bounds fail this comparison as well.
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(DomainError::InvalidAxis { axis, lower: lo, upper: hi });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Projects a point onto the box, leaving velocities out of it.
    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Uniform random point; each component lies in `[lower, upper)`.
pub fn uniform_in_domain(rng: &mut Rng, d: &Domain) -> Vec<f64> {
    (0..d.dim())
        .map(|i| {
            let (lo, hi) = (d.lower[i], d.upper[i]);
            let v = lo + rng.uniform() * (hi - lo);
            // Rounding can land exactly on `hi` for u close to 1.
            if v >= hi {
                hi.next_down().max(lo)
            } else {
                v
            }
        })
        .collect()
}

/// Absorbing walls with damped reflection.
///
/// Components outside the box are moved onto the violated bound and their
/// velocity becomes `-0.5 * v`; in-bounds components are untouched.
pub fn clamp_to_domain(x: &mut [f64], v: &mut [f64], d: &Domain) {
    debug_assert_eq!(x.len(), d.dim());
    debug_assert_eq!(v.len(), d.dim());
    for i in 0..x.len() {
        if x[i] < d.lower[i] {
            x[i] = d.lower[i];
            v[i] *= -0.5;
        } else if x[i] > d.upper[i] {
            x[i] = d.upper[i];
            v[i] *= -0.5;
        }
    }
}
