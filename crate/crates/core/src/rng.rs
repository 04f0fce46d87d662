//! Seeded, platform-independent random number generation.
//!
//! Every run owns its generators explicitly; nothing in the crate touches a
//! thread-local or global RNG. `ChaCha8` is used because its output stream is
//! specified independently of pointer width and endianness.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded random stream.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent stream from this generator's seed.
    ///
    /// The child depends only on `(seed, stream)`, not on how many draws the
    /// parent has made.
    pub fn split(&self, stream: u64) -> Rng {
        Rng::new(mix_seed(self.seed, stream))
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Uniform direction on the unit sphere in `dim` dimensions.
    pub fn on_sphere(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.standard_normal()).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                return v.into_iter().map(|c| c / norm).collect();
            }
        }
    }

    /// Point in the closed ball with a uniform direction and a uniform
    /// distance from the center, so the density grows toward the center.
    /// This is the hyperspherical law of the reference SPSO2011 code. A zero
    /// radius returns the center without consuming draws.
    pub fn in_ball_radial(&mut self, center: &[f64], radius: f64) -> Vec<f64> {
        debug_assert!(radius >= 0.0);
        if radius == 0.0 {
            return center.to_vec();
        }
        let dir = self.on_sphere(center.len());
        let r = radius * self.uniform();
        center.iter().zip(dir).map(|(c, d)| c + r * d).collect()
    }

    /// Uniform point in the closed ball of the given center and radius.
    ///
    /// Direction from a normalized Gaussian, radius scaled by `u^(1/D)`.
    /// A zero radius returns the center without consuming draws.
    pub fn in_ball(&mut self, center: &[f64], radius: f64) -> Vec<f64> {
        debug_assert!(radius >= 0.0);
        if radius == 0.0 {
            return center.to_vec();
        }
        let dim = center.len();
        let dir = self.on_sphere(dim);
        let r = radius * self.uniform().powf(1.0 / dim as f64);
        center.iter().zip(dir).map(|(c, d)| c + r * d).collect()
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a seed with a stream label into a new well-mixed seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// 64-bit FNV-1a, used to turn identifiers into stable seed material.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
        assert_eq!(a.in_ball(&[1.0, 2.0], 3.0), b.in_ball(&[1.0, 2.0], 3.0));
        assert_eq!(a.on_sphere(4), b.on_sphere(4));
    }

    #[test]
    fn split_ignores_parent_position() {
        let a = Rng::new(7);
        let mut b = Rng::new(7);
        b.uniform();
        assert_eq!(a.split(3).uniform(), b.split(3).uniform());
        assert_ne!(a.split(3).uniform(), a.split(4).uniform());
    }

    #[test]
    fn zero_radius_ball_is_center() {
        let mut rng = Rng::new(1);
        assert_eq!(rng.in_ball(&[0.5, -2.0, 3.0], 0.0), vec![0.5, -2.0, 3.0]);
    }

    #[test]
    fn ball_support_and_mean_norm() {
        // E|X| for the uniform 3-ball of radius 1 is 3/4.
        let mut rng = Rng::new(2024);
        let center = [1.0, -1.0, 0.5];
        let n = 100_000;
        let mut total = 0.0;
        for _ in 0..n {
            let p = rng.in_ball(&center, 1.0);
            let r = p.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1.0 + 1e-12);
            total += r;
        }
        assert!((total / n as f64 - 0.75).abs() < 0.02);
    }

    #[test]
    fn radial_ball_mean_norm() {
        // A uniform distance has mean radius/2 in any dimension.
        let mut rng = Rng::new(77);
        let center = [0.0; 6];
        let n = 100_000;
        let mut total = 0.0;
        for _ in 0..n {
            let p = rng.in_ball_radial(&center, 2.0);
            let r = p.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(r <= 2.0 + 1e-12);
            total += r;
        }
        assert!((total / n as f64 - 1.0).abs() < 0.01);
        assert_eq!(rng.in_ball_radial(&[3.0], 0.0), vec![3.0]);
    }

    #[test]
    fn sphere_is_unit() {
        let mut rng = Rng::new(5);
        for d in 1..6 {
            let v = rng.on_sphere(d);
            let n: f64 = v.iter().map(|c| c * c).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
