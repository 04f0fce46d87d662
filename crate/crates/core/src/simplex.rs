//! Nelder–Mead downhill simplex with optional box bounds.
//!
//! Used for both the kernel-hyperparameter likelihood search and the
//! surrogate acquisition searches. Bounds are enforced by projecting every
//! trial vertex onto the box, so the objective is never called outside it.

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Relative spread of vertex values at which the search stops.
    pub rel_tol: f64,
    /// Per-axis offsets of the initial simplex vertices from the start.
    pub initial_step: Vec<f64>,
}

impl SimplexOptions {
    /// `200 * dim` iterations, relative tolerance `1e-6`.
    pub fn for_dim(dim: usize, initial_step: Vec<f64>) -> Self {
        Self { max_iter: 200 * dim, rel_tol: 1e-6, initial_step }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Bounded<'a, F> {
    f: F,
    lower: Option<&'a [f64]>,
    upper: Option<&'a [f64]>,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Bounded<'_, F> {
    fn project(&self, x: &mut [f64]) {
        if let (Some(lo), Some(hi)) = (self.lower, self.upper) {
            for i in 0..x.len() {
                x[i] = x[i].clamp(lo[i], hi[i]);
            }
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` starting from `start`.
///
/// The returned value is never worse than `f(start)` (the start is a vertex
/// of the initial simplex). `bounds`, when given, must contain `start`.
pub fn minimize<F>(f: F, start: &[f64], bounds: Option<(&[f64], &[f64])>, opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    assert!(n >= 1);
    assert_eq!(opts.initial_step.len(), n);
    let mut obj = Bounded { f, lower: bounds.map(|b| b.0), upper: bounds.map(|b| b.1), evaluations: 0 };

    let mut x0 = start.to_vec();
    obj.project(&mut x0);
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.clone());
    for i in 0..n {
        let mut v = x0.clone();
        let step = if opts.initial_step[i] != 0.0 { opts.initial_step[i] } else { 1e-3 };
        v[i] += step;
        if let Some(hi) = obj.upper {
            if v[i] > hi[i] {
                v[i] = x0[i] - step;
            }
        }
        obj.project(&mut v);
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| obj.eval(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();

    while iterations < opts.max_iter {
        // Stable sort keeps the earliest vertex first among equal values.
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        let (fl, fh) = (vals[best], vals[worst]);
        if fl.is_finite() && fh.is_finite() && 2.0 * (fh - fl).abs() <= opts.rel_tol * (fh.abs() + fl.abs()) + 1e-300 {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&verts[k]) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let along = |t: f64, verts: &[Vec<f64>]| -> Vec<f64> {
            centroid.iter().zip(&verts[worst]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let mut xr = along(alpha, &verts);
        obj.project(&mut xr);
        let fr = obj.eval(&xr);
        if fr < fl {
            let mut xe = along(gamma, &verts);
            obj.project(&mut xe);
            let fe = obj.eval(&xe);
            if fe < fr {
                verts[worst] = xe;
                vals[worst] = fe;
            } else {
                verts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            verts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst.
        let (mut xc, accept_below) = if fr < fh { (along(rho, &verts), fr) } else { (along(-rho, &verts), fh) };
        obj.project(&mut xc);
        let fc = obj.eval(&xc);
        if fc < accept_below {
            verts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let xb = verts[best].clone();
        for &k in &order[1..] {
            let mut v: Vec<f64> = xb.iter().zip(&verts[k]).map(|(b, x)| b + sigma * (x - b)).collect();
            obj.project(&mut v);
            vals[k] = obj.eval(&v);
            verts[k] = v;
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    SimplexResult { x: verts.swap_remove(best), value: vals[best], iterations, evaluations: obj.evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_2d() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions { max_iter: 5000, rel_tol: 1e-12, initial_step: vec![0.5, 0.5] };
        let r = minimize(f, &[-1.2, 1.0], None, &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2) + (x[1] + 5.0).powi(2);
        let lo = [-1.0, -1.0];
        let hi = [1.0, 1.0];
        let opts = SimplexOptions::for_dim(2, vec![0.3, 0.3]);
        let mut seen_outside = false;
        let r = minimize(
            |x: &[f64]| {
                seen_outside |= x.iter().any(|c| c.abs() > 1.0);
                f(x)
            },
            &[0.0, 0.0],
            Some((&lo, &hi)),
            &opts,
        );
        assert!(!seen_outside);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + x[0].powi(2) * 0.1;
        for s in [-3.0, -1.0, 0.0, 0.7, 2.5] {
            let r = minimize(f, &[s], None, &SimplexOptions::for_dim(1, vec![0.4]));
            assert!(r.value <= f(&[s]));
        }
    }

    #[test]
    fn nan_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let r = minimize(f, &[0.5], None, &SimplexOptions::for_dim(1, vec![0.1]));
        assert!((r.x[0] - 1.0).abs() < 1e-3);
    }
}
