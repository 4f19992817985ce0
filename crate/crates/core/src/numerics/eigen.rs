//! Hermitian eigensolvers.
//!
//! The general solver embeds `X = R + iI` as the real symmetric matrix
//! `[[R, -I], [I, R]]` of twice the size and runs cyclic Jacobi on it. Every
//! eigenvalue of `X` appears twice in the embedding; an eigenvector `(a, b)`
//! of the embedding maps back to the eigenvector `a + ib` of `X`.

use num_complex::Complex64;

use super::hermitian::HermitianMatrix;
use super::vector::ComplexVector;
use crate::error::{Error, Result};

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_REL_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Documented size limit of [`eig_hermitian`]. Nothing breaks above it, the
/// embedded Jacobi just gets slow (cost grows like `N^3` per sweep).
pub const EIG_MAX_DIM: usize = 512;

/// Eigenvalues in descending order with orthonormal eigenvectors paired by index.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<ComplexVector>,
}

impl EigenDecomposition {
    pub fn largest(&self) -> (f64, &ComplexVector) {
        (self.values[0], &self.vectors[0])
    }

    /// `sum_k lambda_k u_k u_k*`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.vectors[0].len();
        let mut out = HermitianMatrix::zeros(n);
        let support: Vec<usize> = (0..n).collect();
        for (&lam, u) in self.values.iter().zip(&self.vectors) {
            out.add_outer_sparse(lam, u, &support);
        }
        HermitianMatrix::symmetrized(n, out.as_slice().to_vec())
    }
}

/// Real symmetric eigenpairs; `vectors` is row-major and column `k` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub(crate) struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi on a dense real symmetric matrix (row-major, `n x n`).
/// Eigenvalues come back unsorted.
pub(crate) fn jacobi_symmetric(input: &[f64], n: usize, rel_tol: f64, max_sweeps: usize) -> Result<SymEigen> {
    debug_assert_eq!(input.len(), n * n);
    let mut a = input.to_vec();
    let mut v = vec![0.0; n * n];
    for k in 0..n {
        v[k * n + k] = 1.0;
    }
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = rel_tol * fro;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { residual: off });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    let values = (0..n).map(|k| a[k * n + k]).collect();
    Ok(SymEigen { values, vectors: v })
}

/// Full spectrum of an N x N Hermitian matrix, descending.
pub fn eig_hermitian(x: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = x.dim();
    if n > EIG_MAX_DIM {
        return Err(Error::InvalidDimension(format!("eigensolver supports N <= {EIG_MAX_DIM}, got {n}")));
    }
    if x.frobenius_norm() == 0.0 {
        return Ok(EigenDecomposition {
            values: vec![0.0; n],
            vectors: (0..n).map(|k| ComplexVector::basis(n, k)).collect(),
        });
    }

    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = x.get(r, c);
            emb[r * m + c] = z.re;
            emb[r * m + c + n] = -z.im;
            emb[(r + n) * m + c] = z.im;
            emb[(r + n) * m + c + n] = z.re;
        }
    }
    let se = jacobi_symmetric(&emb, m, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| se.values[j].total_cmp(&se.values[i]).then(i.cmp(&j)));
    let candidate = |idx: usize| -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new(se.vectors[k * m + idx], se.vectors[(k + n) * m + idx])).collect()
    };

    // Twin eigenvalues of the embedding are adjacent after sorting.
    let pair_vals: Vec<f64> = (0..n).map(|j| 0.5 * (se.values[order[2 * j]] + se.values[order[2 * j + 1]])).collect();
    let scale = pair_vals.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let cluster_tol = 1e-12 * scale;

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pair_vals[end - 1] - pair_vals[end] <= cluster_tol {
            end += 1;
        }
        // A cluster of p complex eigenvalues owns 2p real eigenvectors that
        // span a p-dimensional complex space; pick p of them by pivoted
        // Gram-Schmidt.
        let p = end - start;
        let mut residuals: Vec<Vec<Complex64>> = (2 * start..2 * end).map(|j| candidate(order[j])).collect();
        for _ in 0..p {
            let (best, _) = residuals.iter().enumerate().map(|(i, r)| (i, norm(r))).fold((0, -1.0), |acc, (i, nr)| {
                if nr > acc.1 {
                    (i, nr)
                } else {
                    acc
                }
            });
            let pick = residuals.swap_remove(best);
            let nr = norm(&pick);
            let q: Vec<Complex64> = pick.iter().map(|z| z / nr).collect();
            for r in residuals.iter_mut() {
                let proj: Complex64 = r.iter().zip(&q).map(|(a, b)| a * b.conj()).sum();
                for (ri, qi) in r.iter_mut().zip(&q) {
                    *ri -= proj * qi;
                }
            }
            let qv = ComplexVector::from_vec_unchecked(q);
            let lam = x.quadratic_form(&qv)?;
            values.push(lam);
            vectors.push(qv);
        }
        start = end;
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    Ok(EigenDecomposition {
        values: idx.iter().map(|&i| values[i]).collect(),
        vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Closed-form eigendecomposition of a 2 x 2 Hermitian matrix.
///
/// # Panics
/// If `q` is not 2 x 2.
pub fn eig2_hermitian(q: &HermitianMatrix) -> EigenDecomposition {
    assert_eq!(q.dim(), 2, "eig2_hermitian needs a 2x2 matrix");
    let a = q.get(0, 0).re;
    let d = q.get(1, 1).re;
    let b = q.get(0, 1);
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    // (tr +- sqrt(tr^2 - 4 det)) / 2 without the cancellation in tr^2 - 4 det
    let disc = half_diff.hypot(b.norm());
    let l1 = mean + disc;
    let l2 = mean - disc;

    let cand1 = [b, Complex64::new(l1 - a, 0.0)];
    let cand2 = [Complex64::new(l1 - d, 0.0), b.conj()];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (u, nu) = if n1 >= n2 { (cand1, n1.sqrt()) } else { (cand2, n2.sqrt()) };
    let u1 = if nu == 0.0 { [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)] } else { [u[0] / nu, u[1] / nu] };
    let u2 = [-u1[1].conj(), u1[0].conj()];
    EigenDecomposition {
        values: vec![l1, l2],
        vectors: vec![ComplexVector::from_vec_unchecked(u1.to_vec()), ComplexVector::from_vec_unchecked(u2.to_vec())],
    }
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues clamped to zero.
pub fn project_psd(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = eig_hermitian(x)?;
    Ok(psd_from_eigen(&eig))
}

pub(crate) fn psd_from_eigen(eig: &EigenDecomposition) -> HermitianMatrix {
    let n = eig.vectors[0].len();
    let support: Vec<usize> = (0..n).collect();
    let mut out = HermitianMatrix::zeros(n);
    for (&lam, u) in eig.values.iter().zip(&eig.vectors) {
        if lam > 0.0 {
            out.add_outer_sparse(lam, u, &support);
        }
    }
    HermitianMatrix::symmetrized(n, out.as_slice().to_vec())
}
