use serde::{Deserialize, Serialize};

use super::GpModel;
use crate::domain::Domain;
use crate::rng::Rng;
use crate::simplex::{self, SimplexOptions};

/// Lower-confidence-bound multiplier for the ~90% band.
pub const LCB_MULTIPLIER: f64 = 1.6;

/// Surface minimized by [`surrogate_argmin`]. `σ` is the posterior standard
/// deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Acquisition {
    /// `m(x)`
    Mean,
    /// `m(x) - κ σ(x)`
    Lcb(f64),
    /// `-σ(x)`
    MaxVar,
}

impl Acquisition {
    pub fn value(&self, model: &GpModel, x: &[f64]) -> f64 {
        match *self {
            Acquisition::Mean => model.mean(x),
            Acquisition::Lcb(kappa) => {
                let (m, v) = model.predict(x);
                m - kappa * v.sqrt()
            }
            Acquisition::MaxVar => -model.predict(x).1.sqrt(),
        }
    }
}

/// Local minimizer of the acquisition surface, found by a bounded simplex
/// search started at `start`. The result lies in `domain` and is never
/// worse than the (projected) start.
pub fn surrogate_argmin(model: &GpModel, domain: &Domain, acq: Acquisition, start: &[f64]) -> Vec<f64> {
    let dim = domain.dim();
    let steps = (0..dim).map(|i| 0.1 * domain.width(i)).collect();
    let opts = SimplexOptions::for_dim(dim, steps);
    let res = simplex::minimize(|x: &[f64]| acq.value(model, x), start, Some((domain.lower(), domain.upper())), &opts);
    res.x
}

/// `n` points of a Halton sequence over the domain, shifted by a seeded
/// Cranley–Patterson rotation.
pub fn halton_scan(rng: &mut Rng, domain: &Domain, n: usize) -> Vec<Vec<f64>> {
    let dim = domain.dim();
    let primes = first_primes(dim);
    let offsets: Vec<f64> = (0..dim).map(|_| rng.uniform()).collect();
    (1..=n)
        .map(|k| {
            (0..dim)
                .map(|i| {
                    let u = (radical_inverse(k as u64, primes[i]) + offsets[i]).fract();
                    domain.lower()[i] + u * domain.width(i)
                })
                .collect()
        })
        .collect()
}

/// Highest-σ point of a 64-point low-discrepancy scan; the start for the
/// max-variance search, whose surface is flat near the data.
pub fn variance_scan_start(model: &GpModel, domain: &Domain, rng: &mut Rng) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for p in halton_scan(rng, domain, 64) {
        let v = model.predict(&p).1;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, p));
        }
    }
    best.expect("scan is non-empty").1
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelParams;

    #[test]
    fn primes_and_radical_inverse() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn scan_inside_domain_and_seeded() {
        let d = Domain::new(vec![-1.0, 2.0, 0.0], vec![1.0, 3.0, 10.0]).unwrap();
        let a = halton_scan(&mut Rng::new(4), &d, 64);
        let b = halton_scan(&mut Rng::new(4), &d, 64);
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert!(a.iter().all(|p| d.contains(p)));
    }

    #[test]
    fn mean_argmin_single_negative_point() {
        let p = KernelParams::new(1.0, 0.0, 0.0, 0.8).unwrap();
        let x0 = vec![0.3, -0.4];
        let m = GpModel::new(p, vec![x0.clone()], vec![-1.5]).unwrap();
        let d = Domain::cube(2, -2.0, 2.0).unwrap();
        let r = surrogate_argmin(&m, &d, Acquisition::Mean, &[1.0, 1.0]);
        let dist = ((r[0] - x0[0]).powi(2) + (r[1] - x0[1]).powi(2)).sqrt();
        assert!(dist < 1e-3, "{r:?}");
    }

    #[test]
    fn max_var_never_lowers_sigma() {
        let p = KernelParams::new(1.0, 0.0, 0.0, 0.3).unwrap();
        let x: Vec<Vec<f64>> = (0..6).flat_map(|i| (0..6).map(move |j| vec![i as f64 * 0.2, j as f64 * 0.2])).collect();
        let y: Vec<f64> = x.iter().map(|q| q[0] - q[1]).collect();
        let m = GpModel::new(p, x, y).unwrap();
        let d = Domain::cube(2, 0.0, 1.0).unwrap();
        for start in [[0.1, 0.1], [0.5, 0.5], [0.9, 0.3]] {
            let r = surrogate_argmin(&m, &d, Acquisition::MaxVar, &start);
            assert!(m.std_dev(&r) >= m.std_dev(&start));
        }
    }
}
