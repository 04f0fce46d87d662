//! Gaussian-process surrogate.
//!
//! Covariance is a squared-exponential term plus a constant offset and a
//! white-noise nugget:
//!
//! ```text
//! K(x, y) = amp² · exp(-‖x - y‖² / length²) + bias² + nugget² · [x ≡ y]
//! ```
//!
//! `[x ≡ y]` is point *identity* (same training index), never coordinate
//! equality, so duplicated coordinates at different indices stay distinct
//! observations and a query point is always a new index.

mod acquisition;
mod fit;
mod model;

pub use acquisition::{halton_scan, surrogate_argmin, variance_scan_start, Acquisition, LCB_MULTIPLIER};
pub use fit::{fit_hyperparams, fit_surrogate, FitOutcome, FitRanges, DEFAULT_RESTARTS};
pub use model::{log_marginal_likelihood, standardization, GpModel, Posterior};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("training set is empty")]
    Empty,
    #[error("{points} training points but {values} target values")]
    LengthMismatch { points: usize, values: usize },
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("hyperparameter fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("Gram matrix is not positive definite even after jitter escalation")]
    FactorizationFailure,
    #[error("hyperparameter fit failed: all {restarts} restarts failed to factorize")]
    FitFailure { restarts: usize },
}

/// Hyperparameters of the composite kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Signal amplitude, `> 0`.
    pub amp: f64,
    /// Constant-offset amplitude, `>= 0`.
    pub bias: f64,
    /// White-noise amplitude, `>= 0`.
    pub nugget: f64,
    /// Length scale in domain units, `> 0`.
    pub length: f64,
}

impl KernelParams {
    pub fn new(amp: f64, bias: f64, nugget: f64, length: f64) -> Result<Self, GpError> {
        let p = Self { amp, bias, nugget, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let all = [self.amp, self.bias, self.nugget, self.length];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GpError::InvalidParams(format!("non-finite value in {self:?}")));
        }
        if self.amp <= 0.0 || self.length <= 0.0 {
            return Err(GpError::InvalidParams("amp and length must be positive".into()));
        }
        if self.bias < 0.0 || self.nugget < 0.0 {
            return Err(GpError::InvalidParams("bias and nugget must be non-negative".into()));
        }
        Ok(())
    }

    pub(crate) fn to_log(self) -> [f64; 4] {
        [self.amp.ln(), self.bias.ln(), self.nugget.ln(), self.length.ln()]
    }

    pub(crate) fn from_log(v: &[f64]) -> Self {
        Self { amp: v[0].exp(), bias: v[1].exp(), nugget: v[2].exp(), length: v[3].exp() }
    }

    /// Prior variance of a single new point: `amp² + bias² + nugget²`.
    pub fn prior_variance(&self) -> f64 {
        self.amp * self.amp + self.bias * self.bias + self.nugget * self.nugget
    }

    /// Covariance as a function of squared distance, excluding the nugget.
    #[inline]
    pub(crate) fn smooth(&self, sq_dist: f64) -> f64 {
        self.amp * self.amp * (-sq_dist / (self.length * self.length)).exp() + self.bias * self.bias
    }
}

/// Evaluates the kernel. `same_point` is the identity indicator of the
/// nugget term.
pub fn kernel(p: &KernelParams, x: &[f64], y: &[f64], same_point: bool) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let k = p.smooth(sq_dist(x, y));
    if same_point {
        k + p.nugget * p.nugget
    } else {
        k
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
