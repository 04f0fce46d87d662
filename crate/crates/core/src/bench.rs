//! Benchmark objectives with seeded shift, rotation and offset.
//!
//! Every function is evaluated as `raw(R·(x - shift)) + offset`. The raw
//! definitions are the classical closed forms; shift vectors and rotations
//! are drawn from a seeded generator rather than read from data files.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain;
use crate::objective::Objective;
use crate::rng::Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("unknown function '{name}' (known: {known})")]
    UnknownFunction { name: String, known: String },
    #[error("function '{name}': {reason}")]
    InvalidSpec { name: String, reason: String },
}

/// Raw function family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sphere,
    Elliptic,
    BentCigar,
    Discus,
    DiffPowers,
    Rosenbrock,
    SchafferF7,
    Ackley,
    Griewank,
    Rastrigin,
    Schwefel,
    ExpandedSchafferF6,
}

/// Location of the Schwefel optimum on each axis.
pub const SCHWEFEL_OPT: f64 = 420.968_746_2;

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Sphere,
        Family::Elliptic,
        Family::BentCigar,
        Family::Discus,
        Family::DiffPowers,
        Family::Rosenbrock,
        Family::SchafferF7,
        Family::Ackley,
        Family::Griewank,
        Family::Rastrigin,
        Family::Schwefel,
        Family::ExpandedSchafferF6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::Elliptic => "elliptic",
            Family::BentCigar => "bent_cigar",
            Family::Discus => "discus",
            Family::DiffPowers => "diff_powers",
            Family::Rosenbrock => "rosenbrock",
            Family::SchafferF7 => "schaffer_f7",
            Family::Ackley => "ackley",
            Family::Griewank => "griewank",
            Family::Rastrigin => "rastrigin",
            Family::Schwefel => "schwefel",
            Family::ExpandedSchafferF6 => "expanded_schaffer_f6",
        }
    }

    /// Domain used when nothing else is requested.
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Family::Schwefel => (-500.0, 500.0),
            _ => (-100.0, 100.0),
        }
    }

    /// The textbook domain for the families that have one, else the default.
    pub fn classical_bounds(self) -> (f64, f64) {
        match self {
            Family::Ackley | Family::Rastrigin | Family::Rosenbrock => (-5.0, 5.0),
            Family::Griewank => (-600.0, 600.0),
            _ => self.default_bounds(),
        }
    }

    /// Unshifted, unrotated minimizer.
    pub fn raw_optimum(self, dim: usize) -> Vec<f64> {
        match self {
            Family::Rosenbrock => vec![1.0; dim],
            Family::Schwefel => vec![SCHWEFEL_OPT; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn eval_raw(self, z: &[f64]) -> f64 {
        let d = z.len();
        let ratio = |i: usize| if d > 1 { i as f64 / (d - 1) as f64 } else { 0.0 };
        match self {
            Family::Sphere => z.iter().map(|v| v * v).sum(),
            Family::Elliptic => z.iter().enumerate().map(|(i, v)| 1e6f64.powf(ratio(i)) * v * v).sum(),
            Family::BentCigar => z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>(),
            Family::Discus => 1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>(),
            Family::DiffPowers => {
                z.iter().enumerate().map(|(i, v)| v.abs().powf(2.0 + 4.0 * ratio(i))).sum::<f64>().sqrt()
            }
            Family::Rosenbrock => {
                z.windows(2).map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2)).sum()
            }
            Family::SchafferF7 => {
                let s: Vec<f64> = if d == 1 {
                    vec![z[0].abs()]
                } else {
                    z.windows(2).map(|w| (w[0] * w[0] + w[1] * w[1]).sqrt()).collect()
                };
                let m = s.len() as f64;
                let acc: f64 = s
                    .iter()
                    .map(|&si| {
                        let r = si.sqrt();
                        r + r * (50.0 * si.powf(0.2)).sin().powi(2)
                    })
                    .sum();
                (acc / m).powi(2)
            }
            Family::Ackley => {
                let n = d as f64;
                let sq = z.iter().map(|v| v * v).sum::<f64>() / n;
                let cs = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            Family::Griewank => {
                let s: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p: f64 = z.iter().enumerate().map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos()).product();
                s - p + 1.0
            }
            Family::Rastrigin => 10.0 * d as f64 + z.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>(),
            Family::Schwefel => 418.9829 * d as f64 - z.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>(),
            Family::ExpandedSchafferF6 => (0..d)
                .map(|i| {
                    let (a, b) = (z[i], z[(i + 1) % d]);
                    let r2 = a * a + b * b;
                    0.5 + (r2.sqrt().sin().powi(2) - 0.5) / (1.0 + 0.001 * r2).powi(2)
                })
                .sum(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| BenchError::UnknownFunction { name: s.to_string(), known: function_names().join(", ") })
    }
}

/// Registered function names.
pub fn function_names() -> Vec<&'static str> {
    Family::ALL.iter().map(|f| f.name()).collect()
}

/// A fully specified benchmark instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub family: Family,
    pub dim: usize,
    pub domain: Domain,
    pub shift: Option<Vec<f64>>,
    /// Orthogonal matrix applied after the shift.
    pub rotation: Option<DMatrix<f64>>,
    pub offset: f64,
}

impl BenchSpec {
    /// Plain instance on the default domain.
    pub fn new(name: &str, dim: usize) -> Result<Self, BenchError> {
        let family: Family = name.parse()?;
        if dim == 0 {
            return Err(BenchError::InvalidSpec { name: name.into(), reason: "dimension must be positive".into() });
        }
        let (lo, hi) = family.default_bounds();
        Ok(Self {
            family,
            dim,
            domain: Domain::cube(dim, lo, hi).expect("finite bounds"),
            shift: None,
            rotation: None,
            offset: 0.0,
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Draws a shift uniformly from the inner 80% of the domain.
    pub fn with_random_shift(mut self, rng: &mut Rng) -> Self {
        let s = (0..self.dim)
            .map(|i| {
                let (lo, hi) = (self.domain.lower()[i], self.domain.upper()[i]);
                let margin = 0.1 * (hi - lo);
                lo + margin + rng.uniform() * (hi - lo - 2.0 * margin)
            })
            .collect();
        self.shift = Some(s);
        self
    }

    pub fn with_random_rotation(mut self, rng: &mut Rng) -> Self {
        self.rotation = Some(random_rotation(rng, self.dim));
        self
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Point where the wrapped function attains `offset`.
    pub fn optimum(&self) -> Vec<f64> {
        let z = self.family.raw_optimum(self.dim);
        let mut x = match &self.rotation {
            Some(r) => (r.transpose() * nalgebra::DVector::from_vec(z)).iter().copied().collect(),
            None => z,
        };
        if let Some(s) = &self.shift {
            for (xi, si) in x.iter_mut().zip(s) {
                *xi += si;
            }
        }
        x
    }

    /// `raw(R·(x - shift)) + offset`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut y: Vec<f64> = match &self.shift {
            Some(s) => x.iter().zip(s).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        if let Some(r) = &self.rotation {
            let n = self.dim;
            let mut z = vec![0.0; n];
            for (i, zi) in z.iter_mut().enumerate() {
                *zi = (0..n).map(|j| r[(i, j)] * y[j]).sum();
            }
            y = z;
        }
        self.family.eval_raw(&y) + self.offset
    }

    fn validate(&self) -> Result<(), BenchError> {
        let bad = |reason: String| BenchError::InvalidSpec { name: self.name().into(), reason };
        if self.domain.dim() != self.dim {
            return Err(bad(format!("domain has dimension {}, expected {}", self.domain.dim(), self.dim)));
        }
        if self.shift.as_ref().is_some_and(|s| s.len() != self.dim) {
            return Err(bad("shift length differs from the dimension".into()));
        }
        if self.rotation.as_ref().is_some_and(|r| r.nrows() != self.dim || r.ncols() != self.dim) {
            return Err(bad("rotation shape differs from the dimension".into()));
        }
        Ok(())
    }
}

/// Wraps a spec as a counted objective named after the family.
pub fn make_function(spec: BenchSpec) -> Result<Objective, BenchError> {
    spec.validate()?;
    let (name, dim) = (spec.name(), spec.dim);
    Ok(Objective::new(name, dim, move |x| spec.eval(x)))
}

/// Haar-distributed rotation (orthogonal, determinant +1) from the QR
/// factorization of a standard normal matrix.
pub fn random_rotation(rng: &mut Rng, dim: usize) -> DMatrix<f64> {
    assert!(dim >= 1, "rotation dimension must be positive");
    if dim == 1 {
        return DMatrix::identity(1, 1);
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.standard_normal());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_reported() {
        let err = BenchSpec::new("weierstrass", 2).unwrap_err();
        assert!(matches!(err, BenchError::UnknownFunction { ref name, .. } if name == "weierstrass"));
        assert!(err.to_string().contains("rastrigin"));
    }

    #[test]
    fn sphere_offset_at_origin() {
        let f = make_function(BenchSpec::new("sphere", 4).unwrap().with_offset(-1400.0)).unwrap();
        assert_eq!(f.eval(&[0.0; 4]), -1400.0);
        assert_eq!(f.eval_count(), 1);
    }

    #[test]
    fn ackley_origin_and_scalar_oracle() {
        let f = make_function(BenchSpec::new("ackley", 2).unwrap()).unwrap();
        assert!(f.eval(&[0.0, 0.0]).abs() < 1e-12);
        // Re-evaluation in a different arrangement of the same formula.
        let (x, y) = (1.0_f64, 1.0_f64);
        let a = -20.0 * (-0.2 * (0.5 * (x * x + y * y)).sqrt()).exp();
        let b = -(0.5 * ((2.0 * PI * x).cos() + (2.0 * PI * y).cos())).exp();
        assert!((f.eval(&[1.0, 1.0]) - (a + b + E + 20.0)).abs() < 1e-12);
        assert!((f.eval(&[1.0, 1.0]) - 3.625_384_938_440_363).abs() < 1e-12);
    }

    #[test]
    fn known_optima() {
        for fam in Family::ALL {
            for dim in [1, 2, 5, 10] {
                if fam == Family::Schwefel {
                    continue;
                }
                let v = fam.eval_raw(&fam.raw_optimum(dim));
                assert!(v.abs() < 1e-10, "{fam} D={dim}: {v}");
            }
        }
    }

    #[test]
    fn schwefel_near_zero_at_optimum_and_locally_minimal() {
        for dim in [1, 3, 10] {
            let x = Family::Schwefel.raw_optimum(dim);
            let v = Family::Schwefel.eval_raw(&x);
            // The 418.9829 constant is rounded, so the minimum is a few 1e-5 per axis.
            assert!(v.abs() < 1e-4 * dim as f64, "{v}");
            for i in 0..dim {
                for h in [-1e-3, 1e-3] {
                    let mut y = x.clone();
                    y[i] += h;
                    assert!(Family::Schwefel.eval_raw(&y) > v);
                }
            }
        }
    }

    #[test]
    fn shift_covariance_and_offset_linearity() {
        let mut rng = Rng::new(8);
        for fam in Family::ALL {
            let base = BenchSpec::new(fam.name(), 4).unwrap();
            let shifted = base.clone().with_random_shift(&mut rng);
            let s = shifted.shift.clone().unwrap();
            for _ in 0..10 {
                let x: Vec<f64> = (0..4).map(|_| rng.uniform() * 10.0 - 5.0).collect();
                let xs: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
                assert!((shifted.eval(&xs) - base.eval(&x)).abs() <= 1e-12 * base.eval(&x).abs().max(1.0));
                let moved = shifted.clone().with_offset(17.5);
                // The offset is one final addition, so the sums agree bit for bit.
                assert_eq!(moved.eval(&xs), shifted.eval(&xs) + 17.5);
            }
        }
    }

    #[test]
    fn shift_lies_in_inner_region() {
        let mut rng = Rng::new(1);
        let spec = BenchSpec::new("rastrigin", 50).unwrap().with_random_shift(&mut rng);
        assert!(spec.shift.unwrap().iter().all(|s| (-80.0..=80.0).contains(s)));
    }

    #[test]
    fn rotation_is_proper_orthogonal() {
        let mut rng = Rng::new(3);
        assert_eq!(random_rotation(&mut rng, 1), DMatrix::identity(1, 1));
        for dim in [2, 3, 7, 10] {
            let q = random_rotation(&mut rng, dim);
            let err = (q.transpose() * &q - DMatrix::<f64>::identity(dim, dim)).abs().max();
            assert!(err < 1e-10);
            assert!((q.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_rotation_invariant() {
        let mut rng = Rng::new(12);
        let plain = BenchSpec::new("sphere", 6).unwrap();
        let rotated = plain.clone().with_random_rotation(&mut rng);
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.uniform() * 200.0 - 100.0).collect();
            assert!((plain.eval(&x) - rotated.eval(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn wrapped_optimum_attains_offset() {
        let mut rng = Rng::new(21);
        for fam in Family::ALL {
            if fam == Family::Schwefel {
                continue;
            }
            let spec = BenchSpec::new(fam.name(), 5)
                .unwrap()
                .with_random_shift(&mut rng)
                .with_random_rotation(&mut rng)
                .with_offset(-300.0);
            let v = spec.eval(&spec.optimum());
            assert!((v + 300.0).abs() < 1e-8, "{fam}: {v}");
        }
    }

    #[test]
    fn invalid_shapes_rejected() {
        let mut spec = BenchSpec::new("sphere", 3).unwrap();
        spec.shift = Some(vec![0.0; 2]);
        assert!(make_function(spec).is_err());
    }
}
