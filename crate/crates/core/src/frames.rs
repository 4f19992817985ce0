//! The uniform 4/2-tight frame of C^2 and its two reconstruction identities.
//!
//! With `A_m = a_m a_m*` and the dual frame `D_m = A_m - I/3`, every rank-one
//! `Q = x x*` satisfies
//!
//! ```text
//! Q = 3/2 * sum_m |<x, a_m>|^2 * D_m      (reconstruction)
//! Q = 3/2 * sum_m <Q, D_m> * A_m          (dual identity)
//! ```

use std::sync::LazyLock;

use num_complex::Complex64;

use crate::numerics::{ComplexVector, HermitianMatrix};

/// Dimension `K` of the block problems.
pub const BLOCK_DIM: usize = 2;
/// Number of frame vectors, `K^2`.
pub const FRAME_SIZE: usize = BLOCK_DIM * BLOCK_DIM;
/// `(K + 1) / K`.
pub const RECON_SCALE: f64 = (BLOCK_DIM as f64 + 1.0) / BLOCK_DIM as f64;
/// `1 / (K + 1)`: the dual-frame identity shift and the off-diagonal overlap `|<a_m, a_n>|^2`.
pub const DUAL_SHIFT: f64 = 1.0 / (BLOCK_DIM as f64 + 1.0);

#[derive(Debug, Clone)]
pub struct TightFrame2 {
    vectors: [[Complex64; 2]; FRAME_SIZE],
    outer: [HermitianMatrix; FRAME_SIZE],
    dual: [HermitianMatrix; FRAME_SIZE],
}

static STANDARD: LazyLock<TightFrame2> = LazyLock::new(TightFrame2::build);

/// The frame `a1 = (alpha, beta)`, `a2 = (beta, alpha)`, `a3 = (alpha, -beta)`,
/// `a4 = (-beta, alpha)`.
pub fn standard_frame() -> &'static TightFrame2 {
    &STANDARD
}

impl TightFrame2 {
    /// `alpha = sqrt((1 - 1/sqrt 3) / 2)`.
    pub fn alpha() -> f64 {
        (0.5 * (1.0 - 1.0 / 3f64.sqrt())).sqrt()
    }

    /// `beta = exp(i 5 pi / 4) sqrt((1 + 1/sqrt 3) / 2)`.
    pub fn beta() -> Complex64 {
        Complex64::from_polar((0.5 * (1.0 + 1.0 / 3f64.sqrt())).sqrt(), 5.0 * std::f64::consts::PI / 4.0)
    }

    fn build() -> Self {
        let a = Complex64::new(Self::alpha(), 0.0);
        let b = Self::beta();
        let vectors = [[a, b], [b, a], [a, -b], [-b, a]];
        let outer = vectors.map(|v| HermitianMatrix::outer(&ComplexVector::from_vec_unchecked(v.to_vec())));
        let dual = outer.clone().map(|m| {
            let mut d = m;
            d.add_scaled(-DUAL_SHIFT, &HermitianMatrix::identity(BLOCK_DIM));
            d
        });
        Self { vectors, outer, dual }
    }

    /// Frame vector `a_m` (zero-based `m`).
    pub fn vector(&self, m: usize) -> [Complex64; 2] {
        self.vectors[m]
    }

    pub fn outer(&self, m: usize) -> &HermitianMatrix {
        &self.outer[m]
    }

    pub fn dual(&self, m: usize) -> &HermitianMatrix {
        &self.dual[m]
    }

    /// `b_m = |<x, a_m>|^2`.
    pub fn measure(&self, x: [Complex64; 2]) -> [f64; FRAME_SIZE] {
        self.vectors.map(|a| (x[0] * a[0].conj() + x[1] * a[1].conj()).norm_sqr())
    }

    /// `Q = 3/2 sum_m b_m (A_m - I/3)`. Total: for inconsistent (noisy) `b`
    /// the result is simply not rank one.
    pub fn reconstruct_rank1(&self, b: &[f64; FRAME_SIZE]) -> HermitianMatrix {
        let mut q = HermitianMatrix::zeros(BLOCK_DIM);
        for (bm, d) in b.iter().zip(&self.dual) {
            q.add_scaled(RECON_SCALE * bm, d);
        }
        q
    }

    /// `gamma_m = <Q, A_m - I/3>`, so that `3/2 sum_m gamma_m A_m = Q` for rank-one `Q`.
    ///
    /// # Panics
    /// If `q` is not 2 x 2.
    pub fn dual_coefficients(&self, q: &HermitianMatrix) -> [f64; FRAME_SIZE] {
        assert_eq!(q.dim(), BLOCK_DIM, "dual coefficients need a 2x2 matrix");
        let mut out = [0.0; FRAME_SIZE];
        for (o, d) in out.iter_mut().zip(&self.dual) {
            *o = q.inner(d).expect("2x2");
        }
        out
    }

    /// `3/2 sum_m gamma_m A_m`.
    pub fn synthesize(&self, gamma: &[f64; FRAME_SIZE]) -> HermitianMatrix {
        let mut q = HermitianMatrix::zeros(BLOCK_DIM);
        for (g, a) in gamma.iter().zip(&self.outer) {
            q.add_scaled(RECON_SCALE * g, a);
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_complex, Rng};

    fn two(x: &ComplexVector) -> [Complex64; 2] {
        [x[0], x[1]]
    }

    #[test]
    fn constants_match_closed_form() {
        let a = TightFrame2::alpha();
        let b = TightFrame2::beta();
        assert!((a - 0.459701).abs() < 1e-6);
        assert!((b.norm() - 0.888074).abs() < 1e-6);
        assert!((b.re + 0.627963).abs() < 1e-6 && (b.im + 0.627963).abs() < 1e-6);
        assert!((a * a + b.norm_sqr() - 1.0).abs() < 1e-15);
        let f = standard_frame();
        assert_eq!(f.vector(0), [Complex64::new(a, 0.0), b]);
    }

    #[test]
    fn frame_is_unit_norm_uniform_and_tight() {
        let f = standard_frame();
        let mut sum = HermitianMatrix::zeros(2);
        for m in 0..4 {
            let am = f.vector(m);
            assert!((am[0].norm_sqr() + am[1].norm_sqr() - 1.0).abs() < 1e-12);
            for n in 0..4 {
                let an = f.vector(n);
                let g = (am[0] * an[0].conj() + am[1] * an[1].conj()).norm_sqr();
                let expect = if m == n { 1.0 } else { DUAL_SHIFT };
                assert!((g - expect).abs() < 1e-12, "gram[{m},{n}] = {g}");
                let dd = f.dual(m).inner(f.dual(n)).unwrap();
                let expect = if m == n { 5.0 / 9.0 } else { -1.0 / 9.0 };
                assert!((dd - expect).abs() < 1e-12);
            }
            sum.add_scaled(1.0, f.outer(m));
        }
        let two_i = HermitianMatrix::identity(2).scale(2.0);
        assert!((&sum - &two_i).frobenius_norm() < 1e-12);
    }

    #[test]
    fn reconstruct_zero_and_basis_vector() {
        let f = standard_frame();
        assert_eq!(f.reconstruct_rank1(&[0.0; 4]).frobenius_norm(), 0.0);
        let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let b = f.measure(e1);
        let expect = [0.211325, 0.788675, 0.211325, 0.788675];
        for (x, y) in b.iter().zip(expect) {
            assert!((x - y).abs() < 1e-6);
        }
        let q = f.reconstruct_rank1(&b);
        assert!((&q - &HermitianMatrix::diag(&[1.0, 0.0])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn reconstruction_and_dual_identity_on_random_rank_one() {
        let f = standard_frame();
        let mut rng = Rng::new(2024, 0);
        for _ in 0..1000 {
            let x = gaussian_complex(&mut rng, 2, 1.0);
            let q = HermitianMatrix::outer(&x);
            let rec = f.reconstruct_rank1(&f.measure(two(&x)));
            assert!((&rec - &q).frobenius_norm() <= 1e-12 * q.frobenius_norm().max(1.0));
            let syn = f.synthesize(&f.dual_coefficients(&q));
            assert!((&syn - &q).frobenius_norm() <= 1e-12 * q.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn dual_identity_examples() {
        let f = standard_frame();
        assert_eq!(f.dual_coefficients(&HermitianMatrix::zeros(2)), [0.0; 4]);
        let a1 = f.outer(0).clone();
        let syn = f.synthesize(&f.dual_coefficients(&a1));
        assert!((&syn - &a1).frobenius_norm() < 1e-12);
    }
}
