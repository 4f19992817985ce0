//! One-sided (Hestenes) Jacobi SVD for small dense real matrices.
//!
//! Used for numerical rank and null spaces of the lifted measurement operator.

use crate::error::{Error, Result};

const SVD_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Svd {
    pub rows: usize,
    pub cols: usize,
    /// Singular values, one per column of the input, unsorted.
    pub sigma: Vec<f64>,
    /// Orthogonalized columns `A V` (column-major, `cols` columns of length `rows`);
    /// column `k` equals `sigma[k] * u_k`.
    pub scaled_left: Vec<f64>,
    /// Right singular vectors, column-major `cols x cols`.
    pub right: Vec<f64>,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().fold(0.0, |m: f64, &s| m.max(s))
    }

    /// Number of singular values strictly above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.sigma_max();
        self.sigma.iter().filter(|&&s| s > cut).count()
    }

    /// Right singular vectors whose singular value is at or below the cutoff.
    pub fn null_space(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let cut = rel_tol * self.sigma_max();
        (0..self.cols)
            .filter(|&k| self.sigma[k] <= cut)
            .map(|k| self.right[k * self.cols..(k + 1) * self.cols].to_vec())
            .collect()
    }

    /// Unit left singular vectors for singular values above the cutoff.
    pub fn range_basis(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let cut = rel_tol * self.sigma_max();
        (0..self.cols)
            .filter(|&k| self.sigma[k] > cut)
            .map(|k| self.scaled_left[k * self.rows..(k + 1) * self.rows].iter().map(|v| v / self.sigma[k]).collect())
            .collect()
    }
}

/// SVD of a row-major `rows x cols` matrix.
pub fn svd(a: &[f64], rows: usize, cols: usize) -> Result<Svd> {
    assert_eq!(a.len(), rows * cols, "svd input has wrong length");
    // column-major working copy
    let mut u = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            u[c * rows + r] = a[r * cols + c];
        }
    }
    let mut v = vec![0.0; cols * cols];
    for k in 0..cols {
        v[k * cols + k] = 1.0;
    }

    // columns below this squared norm are numerically zero and are not rotated
    let negligible = 1e-28 * a.iter().map(|x| x * x).sum::<f64>();
    let mut converged = false;
    let mut worst = 0.0;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0_f64;
        for i in 0..cols.saturating_sub(1) {
            for j in (i + 1)..cols {
                let (ci, cj) = (i * rows, j * rows);
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..rows {
                    alpha += u[ci + r] * u[ci + r];
                    beta += u[cj + r] * u[cj + r];
                    gamma += u[ci + r] * u[cj + r];
                }
                let scale = (alpha * beta).sqrt();
                if alpha <= negligible || beta <= negligible || gamma.abs() <= 1e-15 * scale {
                    continue;
                }
                worst = worst.max(gamma.abs() / scale);
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let x = u[ci + r];
                    let y = u[cj + r];
                    u[ci + r] = c * x - s * y;
                    u[cj + r] = s * x + c * y;
                }
                let (vi, vj) = (i * cols, j * cols);
                for r in 0..cols {
                    let x = v[vi + r];
                    let y = v[vj + r];
                    v[vi + r] = c * x - s * y;
                    v[vj + r] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { residual: worst });
    }
    let sigma = (0..cols).map(|k| u[k * rows..(k + 1) * rows].iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    Ok(Svd { rows, cols, sigma, scaled_left: u, right: v })
}
