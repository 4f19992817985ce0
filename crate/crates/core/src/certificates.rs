//! Structural checks for the lifted problem: dual certificates, kernels of
//! the lifted maps, and injectivity on the tangent space `T_x`.
//!
//! Hermitian matrices are handled in the real coordinates of
//! [`HermitianMatrix::to_real_coords`], where the Hilbert-Schmidt inner
//! product is the Euclidean one, so every rank question becomes a real SVD.

use crate::error::{Error, Result};
use crate::frames::{standard_frame, FRAME_SIZE, RECON_SCALE};
use crate::measurements::{in_recoverable_set, Ensemble, EnsembleKind};
use crate::numerics::svd::svd;
use crate::numerics::{eig_hermitian, Complex64, ComplexVector, HermitianMatrix};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;

/// `T_x = {x y* + y x*}` with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    pub x: ComplexVector,
    pub basis: Vec<HermitianMatrix>,
}

impl TangentSpace {
    /// Orthonormalizes the generators `x y* + y x*` for `y = e_k, i e_k`.
    pub fn new(x: &ComplexVector) -> Result<Self> {
        let n = x.len();
        let n2 = n * n;
        let mut gens = Vec::with_capacity(2 * n);
        for k in 0..n {
            for scale in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let y = ComplexVector::basis(n, k).scale(scale);
                let g = HermitianMatrix::from_fn(n, |r, c| x[r] * y[c].conj() + y[r] * x[c].conj())?;
                gens.push(g.to_real_coords());
            }
        }
        // columns are generators
        let cols = gens.len();
        let mut a = vec![0.0; n2 * cols];
        for (c, g) in gens.iter().enumerate() {
            for (r, v) in g.iter().enumerate() {
                a[r * cols + c] = *v;
            }
        }
        let dec = svd(&a, n2, cols)?;
        let basis = dec
            .range_basis(RANK_REL_TOL)
            .into_iter()
            .map(|v| HermitianMatrix::from_real_coords(n, &v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x: x.clone(), basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// A matrix in the range of the adjoint that vanishes on `x` and is positive
/// on its orthogonal complement.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: EnsembleKind,
    pub y: HermitianMatrix,
    /// One coefficient per measurement, in ensemble order.
    pub gamma: Vec<f64>,
    /// Eigenvalues of `y`, descending.
    pub spectrum: Vec<f64>,
}

impl Certificate {
    /// `||Y x|| / (||Y||_F ||x||)`.
    pub fn kernel_residual(&self, x: &ComplexVector) -> Result<f64> {
        let yx = self.y.mul_vec(x)?;
        Ok(yx.norm() / (self.y.frobenius_norm() * x.norm()))
    }

    /// Number of eigenvalues at or below `1e-9 * lambda_max`.
    pub fn kernel_dim(&self) -> usize {
        let cut = RANK_REL_TOL * self.spectrum[0];
        self.spectrum.iter().filter(|&&l| l <= cut).count()
    }

    /// Second-smallest eigenvalue over the largest.
    pub fn second_smallest_ratio(&self) -> f64 {
        let n = self.spectrum.len();
        if n < 2 {
            return f64::INFINITY;
        }
        self.spectrum[n - 2] / self.spectrum[0]
    }
}

/// The certificate `Y = sum_n A*(gamma_n)` with per-block
/// `gamma_n = 3/2 <q_n q_n*, A_m - I/3>`, `q_n` orthogonal to the block vector.
pub fn build_certificate(kind: EnsembleKind, x: &ComplexVector) -> Result<Certificate> {
    if !kind.is_deterministic() {
        return Err(Error::InvalidConfig("certificates exist only for phi and psi".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidDimension(format!("certificates need N >= 2, got {n}")));
    }
    if !in_recoverable_set(kind, x, 0.0) {
        return Err(Error::OutsideRecoverableSet(format!("{kind} certificate needs x in the recoverable set")));
    }
    let frame = standard_frame();
    let ensemble = Ensemble::build(kind, n)?;
    let mut gamma = Vec::with_capacity(ensemble.len());
    for block in 0..n - 1 {
        let (i, j) = kind.block_support(block);
        let xn = ComplexVector::from_vec_unchecked(vec![x[i], x[j]]);
        let norm = xn.norm();
        if norm == 0.0 {
            return Err(Error::OutsideRecoverableSet(format!("block {} of x vanishes", block + 1)));
        }
        let q = ComplexVector::from_vec_unchecked(vec![-xn[1].conj() / norm, xn[0].conj() / norm]);
        let coeffs = frame.dual_coefficients(&HermitianMatrix::outer(&q));
        gamma.extend(coeffs.iter().map(|c| RECON_SCALE * c));
    }
    debug_assert_eq!(gamma.len(), FRAME_SIZE * (n - 1));
    let y = ensemble.adjoint(&gamma)?;
    let spectrum = eig_hermitian(&y)?.values;
    Ok(Certificate { kind, y, gamma, spectrum })
}

/// Distance of `y` from the range of the adjoint of `ensemble`, relative to `||y||_F`.
pub fn range_residual(ensemble: &Ensemble, y: &HermitianMatrix) -> Result<f64> {
    let n = ensemble.dim();
    let rows = ensemble.len();
    let cols = n * n;
    let dec = svd(&ensemble.lifted_matrix(), rows, cols)?;
    let cut = RANK_REL_TOL * dec.sigma_max();
    let coords = y.to_real_coords();
    let mut rest = coords.clone();
    for k in 0..cols {
        if dec.sigma[k] <= cut {
            continue;
        }
        let v = &dec.right[k * cols..(k + 1) * cols];
        let dot: f64 = v.iter().zip(&coords).map(|(a, b)| a * b).sum();
        rest.iter_mut().zip(v).for_each(|(r, vi)| *r -= dot * vi);
    }
    let total = coords.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(rest.iter().map(|v| v * v).sum::<f64>().sqrt() / total.max(f64::MIN_POSITIVE))
}

/// Orthonormal (Hilbert-Schmidt) basis of the kernel of the lifted map.
pub fn nullspace_basis(kind: EnsembleKind, n: usize) -> Result<Vec<HermitianMatrix>> {
    let ensemble = Ensemble::build(kind, n)?;
    let dec = svd(&ensemble.lifted_matrix(), ensemble.len(), n * n)?;
    dec.null_space(RANK_REL_TOL).into_iter().map(|v| HermitianMatrix::from_real_coords(n, &v)).collect()
}

/// Whether `(r, c)` must vanish for every kernel element of the kind:
/// the diagonal, plus the first off-diagonals (Phi) or the first row and
/// column (Psi).
pub fn constrained_entry(kind: EnsembleKind, r: usize, c: usize) -> bool {
    match kind {
        EnsembleKind::Phi => r.abs_diff(c) <= 1,
        _ => r == c || r == 0 || c == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectivityReport {
    /// Rank of the lifted map restricted to `T_x`.
    pub rank: usize,
    /// Real dimension of `T_x`, `2N - 1` for nonzero `x`.
    pub tangent_dim: usize,
    pub injective: bool,
}

/// Rank of the lifted map on `T_x`.
pub fn check_injectivity_on_t(kind: EnsembleKind, x: &ComplexVector) -> Result<InjectivityReport> {
    if x.norm() == 0.0 {
        return Err(Error::InvalidConfig("injectivity check needs x != 0".into()));
    }
    let n = x.len();
    let ensemble = Ensemble::build(kind, n)?;
    let tangent = TangentSpace::new(x)?;
    let cols = tangent.dim();
    let rows = ensemble.len();
    let mut m = vec![0.0; rows * cols];
    for (c, t) in tangent.basis.iter().enumerate() {
        for (r, v) in ensemble.measure_lifted(t)?.values().iter().enumerate() {
            m[r * cols + c] = *v;
        }
    }
    let rank = svd(&m, rows, cols)?.rank(RANK_REL_TOL);
    Ok(InjectivityReport { rank, tangent_dim: cols, injective: rank == 2 * n - 1 && cols == 2 * n - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_complex, Rng};

    fn real(v: &[f64]) -> ComplexVector {
        ComplexVector::from_real(v).unwrap()
    }

    fn check(kind: EnsembleKind, x: &ComplexVector) {
        let cert = build_certificate(kind, x).unwrap();
        assert!(cert.kernel_residual(x).unwrap() < 1e-10);
        assert_eq!(cert.kernel_dim(), 1);
        assert!(cert.second_smallest_ratio() >= 1e-8);
        let smallest = *cert.spectrum.last().unwrap();
        assert!(smallest >= -1e-10 * cert.spectrum[0]);
        let ip = HermitianMatrix::outer(x).inner(&cert.y).unwrap();
        assert!(ip.abs() < 1e-10 * cert.y.frobenius_norm() * x.norm_sqr());
    }

    #[test]
    fn certificate_examples() {
        check(EnsembleKind::Phi, &real(&[1.0, 1.0, 1.0]));
        check(EnsembleKind::Psi, &real(&[1.0, 1.0, 1.0]));
    }

    #[test]
    fn certificate_random_and_in_range() {
        let mut rng = Rng::new(31, 0);
        for kind in [EnsembleKind::Phi, EnsembleKind::Psi] {
            for _ in 0..5 {
                let x = gaussian_complex(&mut rng, 6, 1.0);
                check(kind, &x);
                let cert = build_certificate(kind, &x).unwrap();
                let e = Ensemble::build(kind, 6).unwrap();
                assert!(range_residual(&e, &cert.y).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn certificate_phase_equivariance() {
        let mut rng = Rng::new(32, 0);
        let x = gaussian_complex(&mut rng, 5, 1.0);
        let c = Complex64::from_polar(1.0, 0.7);
        let a = build_certificate(EnsembleKind::Psi, &x).unwrap();
        let b = build_certificate(EnsembleKind::Psi, &x.scale(c)).unwrap();
        for (u, v) in a.spectrum.iter().zip(&b.spectrum) {
            assert!((u - v).abs() < 1e-12 * a.spectrum[0]);
        }
    }

    #[test]
    fn certificate_rejects_out_of_set() {
        assert!(matches!(
            build_certificate(EnsembleKind::Psi, &real(&[0.0, 1.0, 1.0])),
            Err(Error::OutsideRecoverableSet(_))
        ));
        assert!(build_certificate(EnsembleKind::Phi, &real(&[1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn range_residual_detects_outside_component() {
        let e = Ensemble::build(EnsembleKind::Phi, 4).unwrap();
        // (1,3) entry is in the kernel, hence orthogonal to the range of the adjoint
        let y = HermitianMatrix::from_fn(4, |r, c| match (r, c) {
            (0, 2) | (2, 0) => Complex64::new(1.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
        .unwrap();
        assert!((range_residual(&e, &y).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nullspace_dimensions_and_patterns() {
        for kind in [EnsembleKind::Phi, EnsembleKind::Psi] {
            for n in 2..=6 {
                let basis = nullspace_basis(kind, n).unwrap();
                assert_eq!(basis.len(), n * n - (3 * n - 2), "{kind} N={n}");
                let e = Ensemble::build(kind, n).unwrap();
                for z in &basis {
                    assert!((z.frobenius_norm() - 1.0).abs() < 1e-10);
                    assert!(e.measure_lifted(z).unwrap().norm() < 1e-10);
                    for r in 0..n {
                        for c in 0..n {
                            if constrained_entry(kind, r, c) {
                                assert!(z.get(r, c).norm() < 1e-10);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_space_dimension() {
        let mut rng = Rng::new(33, 0);
        let x = gaussian_complex(&mut rng, 5, 1.0);
        let t = TangentSpace::new(&x).unwrap();
        assert_eq!(t.dim(), 9);
        for (i, a) in t.basis.iter().enumerate() {
            for (j, b) in t.basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).unwrap() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn injectivity_examples() {
        let r = check_injectivity_on_t(EnsembleKind::Phi, &real(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!((r.rank, r.injective), (7, true));
        let r = check_injectivity_on_t(EnsembleKind::Psi, &real(&[0.0, 1.0, 1.0])).unwrap();
        assert!(!r.injective);
        let r = check_injectivity_on_t(EnsembleKind::Phi, &real(&[1.0, 0.0, 1.0])).unwrap();
        assert!(!r.injective);
        assert!(check_injectivity_on_t(EnsembleKind::Phi, &ComplexVector::zeros(3)).is_err());
    }
}
