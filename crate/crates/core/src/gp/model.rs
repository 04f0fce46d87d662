use nalgebra::{DMatrix, DVector};

use super::{sq_dist, GpError, KernelParams};

/// Relative jitter levels tried, in order, when the Gram matrix does not
/// factorize as is. Scaled by the mean of the diagonal.
const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Result of a Cholesky factorization, possibly after jitter.
pub(crate) struct Factor {
    pub l: DMatrix<f64>,
    pub jitter_steps: u32,
}

/// Factorizes `k` in place, escalating diagonal jitter on failure.
pub(crate) fn factorize(k: DMatrix<f64>) -> Result<Factor, GpError> {
    let n = k.nrows();
    let scale = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n as f64;
    if let Some(c) = k.clone().cholesky() {
        return Ok(Factor { l: c.unpack(), jitter_steps: 0 });
    }
    for (step, rel) in JITTER_LADDER.iter().enumerate() {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += rel * scale;
        }
        if let Some(c) = kj.cholesky() {
            return Ok(Factor { l: c.unpack(), jitter_steps: step as u32 + 1 });
        }
    }
    Err(GpError::FactorizationFailure)
}

pub(crate) fn check_training(x: &[Vec<f64>], y: &[f64]) -> Result<usize, GpError> {
    if x.is_empty() {
        return Err(GpError::Empty);
    }
    if x.len() != y.len() {
        return Err(GpError::LengthMismatch { points: x.len(), values: y.len() });
    }
    let dim = x[0].len();
    for (index, p) in x.iter().enumerate() {
        if p.len() != dim {
            return Err(GpError::DimensionMismatch { index, got: p.len(), expected: dim });
        }
    }
    Ok(dim)
}

pub(crate) fn gram(p: &KernelParams, x: &[Vec<f64>]) -> DMatrix<f64> {
    let n = x.len();
    let nug = p.nugget * p.nugget;
    let mut k = DMatrix::zeros(n, n);
    for j in 0..n {
        k[(j, j)] = p.smooth(0.0) + nug;
        for i in j + 1..n {
            let v = p.smooth(sq_dist(&x[i], &x[j]));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// `-½ yᵀ L⁻ᵀ L⁻¹ y - Σ ln L_ii`, with `L` the Cholesky factor.
pub(crate) fn lml_from_factor(l: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let z = l.solve_lower_triangular(y).expect("Cholesky factor has a positive diagonal");
    let half_logdet: f64 = (0..l.nrows()).map(|i| l[(i, i)].ln()).sum();
    -0.5 * z.dot(&z) - half_logdet
}

/// Log marginal likelihood of `y` under a zero-mean GP with kernel `p`,
/// without the constant `-n/2 ln 2π`.
pub fn log_marginal_likelihood(p: &KernelParams, x: &[Vec<f64>], y: &[f64]) -> Result<f64, GpError> {
    check_training(x, y)?;
    p.validate()?;
    let f = factorize(gram(p, x))?;
    Ok(lml_from_factor(&f.l, &DVector::from_column_slice(y)))
}

/// Posterior mean and variance at a batch of query points.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// A conditioned Gaussian process.
///
/// Targets may be affinely standardized: the process is fitted to
/// `(y - shift) / scale` with a zero prior mean, and predictions are mapped
/// back. `GpModel::new` uses the identity transform.
#[derive(Clone, Debug)]
pub struct GpModel {
    params: KernelParams,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    shift: f64,
    scale: f64,
    l: DMatrix<f64>,
    alpha: DVector<f64>,
    alpha_sum: f64,
    log_likelihood: f64,
    jitter_steps: u32,
}

impl GpModel {
    /// Conditions a zero-mean GP on raw targets.
    pub fn new(params: KernelParams, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, GpError> {
        Self::with_transform(params, x, y, 0.0, 1.0)
    }

    /// Conditions on standardized targets; `params` are in standardized
    /// units.
    pub fn standardized(params: KernelParams, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, GpError> {
        let (shift, scale) = standardization(&y);
        Self::with_transform(params, x, y, shift, scale)
    }

    pub fn with_transform(
        params: KernelParams,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        shift: f64,
        scale: f64,
    ) -> Result<Self, GpError> {
        check_training(&x, &y)?;
        params.validate()?;
        assert!(scale > 0.0 && scale.is_finite());
        let z = DVector::from_iterator(y.len(), y.iter().map(|v| (v - shift) / scale));
        let f = factorize(gram(&params, &x))?;
        let w = f.l.solve_lower_triangular(&z).expect("positive diagonal");
        let alpha = f.l.tr_solve_lower_triangular(&w).expect("positive diagonal");
        let half_logdet: f64 = (0..f.l.nrows()).map(|i| f.l[(i, i)].ln()).sum();
        let log_likelihood = -0.5 * w.dot(&w) - half_logdet;
        let alpha_sum = alpha.sum();
        Ok(Self {
            params,
            train_x: x,
            train_y: y,
            shift,
            scale,
            l: f.l,
            alpha,
            alpha_sum,
            log_likelihood,
            jitter_steps: f.jitter_steps,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Kernel parameters expressed in the units of the raw targets.
    pub fn params_in_target_units(&self) -> KernelParams {
        KernelParams {
            amp: self.params.amp * self.scale,
            bias: self.params.bias * self.scale,
            nugget: self.params.nugget * self.scale,
            length: self.params.length,
        }
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.train_x[0].len()
    }

    /// Jitter escalation steps needed to factorize (0 = none).
    pub fn jitter_steps(&self) -> u32 {
        self.jitter_steps
    }

    /// Log marginal likelihood of the (transformed) targets.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Cross-covariances `K(x, X)` without the nugget (a query is a new index).
    fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.train_x.iter().map(|t| self.params.smooth(sq_dist(x, t))))
    }

    /// Posterior mean only; cheaper than [`GpModel::predict`].
    pub fn mean(&self, x: &[f64]) -> f64 {
        let a2 = self.params.amp * self.params.amp;
        let inv_l2 = 1.0 / (self.params.length * self.params.length);
        let mut acc = self.params.bias * self.params.bias * self.alpha_sum;
        for (t, a) in self.train_x.iter().zip(self.alpha.iter()) {
            acc += a2 * (-sq_dist(x, t) * inv_l2).exp() * a;
        }
        self.shift + self.scale * acc
    }

    /// Posterior mean and variance at one point. The variance includes the
    /// nugget and is floored at zero.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let mut k = self.cross(x);
        let m = k.dot(&self.alpha);
        self.l.solve_lower_triangular_mut(&mut k);
        let var = (self.params.prior_variance() - k.dot(&k)).max(0.0);
        (self.shift + self.scale * m, self.scale * self.scale * var)
    }

    /// Posterior standard deviation at one point.
    pub fn std_dev(&self, x: &[f64]) -> f64 {
        self.predict(x).1.sqrt()
    }

    pub fn posterior(&self, queries: &[Vec<f64>]) -> Posterior {
        let (mean, var) = queries.iter().map(|q| self.predict(q)).unzip();
        Posterior { mean, var }
    }
}

/// Mean and (population) standard deviation used to standardize targets.
/// A degenerate spread maps to scale 1.
pub fn standardization(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd.is_finite() && sd > 1e-12 * (1.0 + mean.abs()) {
        (mean, sd)
    } else {
        (mean, 1.0)
    }
}
