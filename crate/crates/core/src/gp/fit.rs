use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{check_training, factorize, lml_from_factor, standardization};
use super::{sq_dist, GpError, GpModel, KernelParams};
use crate::domain::Domain;
use crate::rng::Rng;
use crate::simplex::{self, SimplexOptions};

pub const DEFAULT_RESTARTS: usize = 10;

/// Log-uniform sampling box for restart points, also used as the bounds of
/// the local searches. Order: amp, bias, nugget, length.
#[derive(Clone, Debug, PartialEq)]
pub struct FitRanges {
    pub log_lower: [f64; 4],
    pub log_upper: [f64; 4],
}

impl FitRanges {
    /// Ranges scaled to the target spread `s_y` and the domain diameter.
    pub fn new(target_scale: f64, diameter: f64) -> Self {
        let s = target_scale;
        let lo = [1e-2 * s, 1e-6 * s, 1e-6 * s, 1e-2 * diameter];
        let hi = [1e2 * s, 10.0 * s, s, diameter];
        Self { log_lower: lo.map(f64::ln), log_upper: hi.map(f64::ln) }
    }

    pub fn sample(&self, rng: &mut Rng) -> KernelParams {
        let v: Vec<f64> =
            (0..4).map(|i| self.log_lower[i] + rng.uniform() * (self.log_upper[i] - self.log_lower[i])).collect();
        KernelParams::from_log(&v)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOutcome {
    pub params: KernelParams,
    pub log_likelihood: f64,
    /// Restarts whose starting point could not be factorized.
    pub failed_restarts: usize,
    pub likelihood_evaluations: usize,
}

/// Likelihood as a function of the kernel parameters on fixed data.
struct LikelihoodSurface {
    sq: DMatrix<f64>,
    y: DVector<f64>,
}

impl LikelihoodSurface {
    fn new(x: &[Vec<f64>], y: &[f64]) -> Self {
        let n = x.len();
        let mut sq = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j + 1..n {
                sq[(i, j)] = sq_dist(&x[i], &x[j]);
            }
        }
        Self { sq, y: DVector::from_column_slice(y) }
    }

    fn eval(&self, p: &KernelParams) -> Option<f64> {
        // Same entries as the model's Gram matrix, but only the lower
        // triangle, which is all the factorization reads.
        let n = self.sq.nrows();
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            k[(j, j)] = p.prior_variance();
            for i in j + 1..n {
                k[(i, j)] = p.smooth(self.sq[(i, j)]);
            }
        }
        let f = factorize(k).ok()?;
        let v = lml_from_factor(&f.l, &self.y);
        v.is_finite().then_some(v)
    }
}

/// Maximum-likelihood kernel parameters by restarted simplex search in
/// log-parameter space.
///
/// Each restart starts from a log-uniform draw inside [`FitRanges`] built from
/// the spread of `y` and the diameter of `domain`. The best local optimum is
/// returned; ties keep the earliest restart.
pub fn fit_hyperparams(
    rng: &mut Rng,
    x: &[Vec<f64>],
    y: &[f64],
    domain: &Domain,
    restarts: usize,
) -> Result<FitOutcome, GpError> {
    check_training(x, y)?;
    if x.len() < 2 {
        return Err(GpError::TooFewPoints { needed: 2, got: x.len() });
    }
    assert!(restarts >= 1, "at least one restart is required");
    let (_, spread) = standardization(y);
    let ranges = FitRanges::new(spread, domain.diameter());
    let surface = LikelihoodSurface::new(x, y);

    let steps: Vec<f64> = (0..4).map(|i| 0.1 * (ranges.log_upper[i] - ranges.log_lower[i])).collect();
    let opts = SimplexOptions::for_dim(4, steps);
    let mut best: Option<(KernelParams, f64)> = None;
    let mut failed = 0;
    let mut evaluations = 0;
    for _ in 0..restarts {
        let start = ranges.sample(rng);
        if surface.eval(&start).is_none() {
            failed += 1;
            evaluations += 1;
            continue;
        }
        let res = simplex::minimize(
            |v: &[f64]| surface.eval(&KernelParams::from_log(v)).map_or(f64::INFINITY, |l| -l),
            &start.to_log(),
            Some((&ranges.log_lower, &ranges.log_upper)),
            &opts,
        );
        evaluations += res.evaluations + 1;
        let lml = -res.value;
        if best.as_ref().is_none_or(|(_, b)| lml > *b) {
            best = Some((KernelParams::from_log(&res.x), lml));
        }
    }
    match best {
        Some((params, log_likelihood)) => {
            Ok(FitOutcome { params, log_likelihood, failed_restarts: failed, likelihood_evaluations: evaluations })
        }
        None => Err(GpError::FitFailure { restarts }),
    }
}

/// Standardizes the targets, fits the kernel, and conditions the model.
pub fn fit_surrogate(
    rng: &mut Rng,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    domain: &Domain,
    restarts: usize,
) -> Result<(GpModel, FitOutcome), GpError> {
    check_training(&x, &y)?;
    let (shift, scale) = standardization(&y);
    let z: Vec<f64> = y.iter().map(|v| (v - shift) / scale).collect();
    let outcome = fit_hyperparams(rng, &x, &z, domain, restarts)?;
    let model = GpModel::with_transform(outcome.params, x, y, shift, scale)?;
    Ok((model, outcome))
}
