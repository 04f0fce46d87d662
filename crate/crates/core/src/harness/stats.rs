//! Descriptive statistics and one-sided two-sample t-tests.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("each sample needs at least 2 values (got {a} and {b})")]
    TooFewSamples { a: usize, b: usize },
    #[error("both samples have zero variance and equal means")]
    DegenerateSamples,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Summary of one sample. `sd` uses the `n - 1` denominator and is zero
/// for a single value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Describe {
    pub n: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub sd: f64,
}

/// Statistics are computed on the sorted sample, so the result does not
/// depend on input order at all (not even in the last bit).
pub fn describe(values: &[f64]) -> Describe {
    assert!(!values.is_empty(), "cannot describe an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Describe { n, min: v[0], median: median_sorted(&v), mean, max: v[n - 1], sd }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    median_sorted(&v)
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Result of a one-sided test of `mean(a) < mean(b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// `P(T <= t)`; small values favor `mean(a) < mean(b)`.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn check(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples { a: a.len(), b: b.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom.
pub fn welch_one_sided(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    check(a, b)?;
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (qa, qb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = qa + qb;
    if se2 == 0.0 {
        return separated(ma, mb);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (a.len() as f64 - 1.0) + qb * qb / (b.len() as f64 - 1.0));
    Ok(TTest { t, df, p: student_t_cdf(t, df) })
}

/// Student's equal-variance t-test.
pub fn pooled_one_sided(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    check(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let df = na + nb - 2.0;
    let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    if sp2 == 0.0 {
        return separated(ma, mb);
    }
    let t = (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TTest { t, df, p: student_t_cdf(t, df) })
}

/// Zero spread on both sides: the order of the means decides outright.
fn separated(ma: f64, mb: f64) -> Result<TTest, StatsError> {
    if ma == mb {
        return Err(StatsError::DegenerateSamples);
    }
    let (t, p) = if ma < mb { (f64::NEG_INFINITY, 0.0) } else { (f64::INFINITY, 1.0) };
    Ok(TTest { t, df: f64::NAN, p })
}

/// CDF of Student's t distribution with `df > 0` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection keeps the series in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `I_x(a, b)` by the continued fraction, using the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` where it converges faster.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_single_and_even() {
        let d = describe(&[4.0]);
        assert_eq!((d.min, d.median, d.mean, d.max, d.sd), (4.0, 4.0, 4.0, 4.0, 0.0));
        let d = describe(&[3.0, 1.0, 4.0, 2.0]);
        assert_eq!((d.min, d.median, d.mean, d.max), (1.0, 2.5, 2.5, 4.0));
        assert!((d.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_at_integers_and_half() {
        let mut fact = 1.0f64;
        for n in 1..25 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a.
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            for &s in &[0.5, 1.0, 3.0, 17.5] {
                assert!((regularized_incomplete_beta(1.0, s, x) - (1.0 - (1.0 - x).powf(s))).abs() < 1e-13);
                assert!((regularized_incomplete_beta(s, 1.0, x) - x.powf(s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn t_cdf_cauchy_and_symmetry() {
        // One degree of freedom is the Cauchy distribution.
        for &t in &[-30.0, -2.0, -0.3, 0.0, 0.7, 5.0] {
            let exact = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0) - exact).abs() < 1e-13);
        }
        // Two degrees of freedom have a closed form too.
        for &t in &[-4.0f64, -1.0, 0.5, 2.5] {
            let exact = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((student_t_cdf(t, 2.0) - exact).abs() < 1e-13);
        }
        for &df in &[1.0, 3.3, 40.0, 200.0] {
            assert!((student_t_cdf(1.3, df) + student_t_cdf(-1.3, df) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn identical_samples_give_half() {
        let a = [1.0, 2.0, 4.0, 8.0];
        let r = welch_one_sided(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_separated() {
        assert_eq!(welch_one_sided(&[1.0, 1.0], &[1.0, 1.0]), Err(StatsError::DegenerateSamples));
        assert_eq!(welch_one_sided(&[0.0, 0.0], &[1.0, 1.0]).unwrap().p, 0.0);
        assert_eq!(pooled_one_sided(&[2.0, 2.0], &[1.0, 1.0]).unwrap().p, 1.0);
        assert!(matches!(welch_one_sided(&[1.0], &[1.0, 2.0]), Err(StatsError::TooFewSamples { .. })));
    }

    #[test]
    fn swapping_samples_negates_t() {
        let a = [0.3, 1.9, 2.2, 0.8, 1.1];
        let b = [1.4, 2.5, 3.1, 2.0, 2.9, 4.2, 1.7];
        let ab = welch_one_sided(&a, &b).unwrap();
        let ba = welch_one_sided(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert!((ab.p + ba.p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pooled_equals_welch_for_equal_sizes_and_variances() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        let w = welch_one_sided(&a, &b).unwrap();
        let s = pooled_one_sided(&a, &b).unwrap();
        assert!((w.t - s.t).abs() < 1e-14);
        assert!((w.df - 4.0).abs() < 1e-12 && s.df == 4.0);
    }
}
