use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::vector::ComplexVector;

/// Seeded random stream.
///
/// Backed by ChaCha20, a counter-based generator: the master `seed` is
/// expanded into the key and `stream` selects an independent nonce, so any
/// `(seed, stream)` pair reproduces the same draws on every run and thread.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh stream from the same master seed.
    pub fn fork(&self, stream: u64) -> Rng {
        Rng::new(self.seed, stream)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

/// Circularly-symmetric complex Gaussian vector: real and imaginary parts are
/// independent `N(0, variance / 2)`, so `E|x[n]|^2 = variance`.
pub fn gaussian_complex(rng: &mut Rng, n: usize, variance: f64) -> ComplexVector {
    assert!(variance > 0.0, "variance must be positive");
    let s = (variance / 2.0).sqrt();
    let entries = (0..n)
        .map(|_| {
            let re = rng.standard_normal();
            let im = rng.standard_normal();
            Complex64::new(s * re, s * im)
        })
        .collect();
    ComplexVector::from_vec_unchecked(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let a = gaussian_complex(&mut Rng::new(5, 3), 32, 1.0);
        let b = gaussian_complex(&mut Rng::new(5, 3), 32, 1.0);
        assert_eq!(a, b);
        let c = gaussian_complex(&mut Rng::new(5, 4), 32, 1.0);
        assert_ne!(a, c);
    }

    #[test]
    fn second_moment_matches_variance() {
        for variance in [1.0, 4.0] {
            let mut rng = Rng::new(77, 0);
            let x = gaussian_complex(&mut rng, 10_000, variance);
            let m2 = x.norm_sqr() / 10_000.0;
            assert!((m2 / variance - 1.0).abs() < 0.05, "variance {variance}: got {m2}");
            // each component carries half the power
            let re2: f64 = x.iter().map(|z| z.re * z.re).sum::<f64>() / 10_000.0;
            assert!((re2 / (variance / 2.0) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn streams_are_uncorrelated() {
        let a = gaussian_complex(&mut Rng::new(9, 0), 10_000, 1.0);
        let b = gaussian_complex(&mut Rng::new(9, 1), 10_000, 1.0);
        let corr = a.inner(&b).unwrap().norm() / 10_000.0;
        assert!(corr < 0.05, "cross correlation {corr}");
    }
}
