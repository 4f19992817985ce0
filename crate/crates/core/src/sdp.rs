//! Lifted convex recovery: find `X >= 0` with `A(X) = b` (or `||A(X) - b|| <= eps`)
//! using projections onto the PSD cone and the measurement set, then read off
//! the leading eigenvector.
//!
//! Two schemes are available. Plain alternating projections
//! `X <- P_psd(P_aff(X))` converge slowly once the measurement set meets the
//! cone at a shallow angle, which is the normal situation for the chain
//! ensemble. Averaged alternating reflections (Douglas-Rachford) iterate
//! `Z <- Z + P_aff(2 P_psd(Z) - Z) - P_psd(Z)` and report `X = P_psd(Z)`; they
//! reach the same feasible point in a small fraction of the iterations and
//! are the default.

use crate::error::{Error, Result};
use crate::measurements::{Ensemble, IntensityVector};
use crate::numerics::{
    check_len, eig_hermitian, jacobi_symmetric, psd_from_eigen, ComplexVector, HermitianMatrix, JACOBI_MAX_SWEEPS,
    JACOBI_REL_TOL,
};

/// Eigenvalues of the Gram matrix below this fraction of the largest are dropped.
pub const GRAM_PINV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Douglas-Rachford on the pair (PSD cone, measurement set).
    #[default]
    Reflections,
    /// `X <- P_psd(P_aff(X))`.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpConfig {
    pub max_iter: usize,
    /// Relative Frobenius change between iterates that counts as stationary.
    pub tol: f64,
    /// Radius of the residual ball; 0 asks for exact consistency.
    pub epsilon: f64,
    /// Step `X - w I` applied before each cone projection.
    pub trace_weight: f64,
    pub scheme: Scheme,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-7, epsilon: 0.0, trace_weight: 0.0, scheme: Scheme::Reflections }
    }
}

impl SdpConfig {
    /// Radius `L sigma_nu^2` for `L` measurements with noise variance `sigma_nu2`.
    pub fn noise_radius(l: usize, sigma_nu2: f64) -> f64 {
        l as f64 * sigma_nu2
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.trace_weight >= 0.0 && self.trace_weight.is_finite()) {
            return Err(Error::InvalidConfig(format!("trace_weight must be >= 0, got {}", self.trace_weight)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SdpResult {
    pub x: HermitianMatrix,
    pub x_hat: ComplexVector,
    pub iterations: usize,
    /// Distance of `A(X)` to the residual ball around `b`.
    pub residual: f64,
    pub converged: bool,
    /// `lambda_2 / lambda_1` of `X` (1 when `X = 0`).
    pub rank1_gap: f64,
    /// Frobenius distance between successive iterates of the governing
    /// sequence (`X` for alternating projections, `Z` for reflections).
    /// Non-increasing for both schemes.
    pub steps: Vec<f64>,
}

/// Orthogonal projection onto `{X : A(X) = c}` for a fixed ensemble, using a
/// precomputed pseudoinverse of the Gram matrix `G = A A*`.
#[derive(Debug, Clone)]
pub struct AffineProjector<'a> {
    ensemble: &'a Ensemble,
    gram_pinv: Vec<f64>,
}

impl<'a> AffineProjector<'a> {
    pub fn new(ensemble: &'a Ensemble) -> Result<Self> {
        let l = ensemble.len();
        let eig = jacobi_symmetric(&ensemble.gram(), l, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)?;
        let lmax = eig.values.iter().fold(0.0_f64, |m, &v| m.max(v));
        let cut = GRAM_PINV_CUTOFF * lmax;
        let mut pinv = vec![0.0; l * l];
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam <= cut {
                continue;
            }
            let inv = 1.0 / lam;
            for i in 0..l {
                let vi = eig.vectors[i * l + k] * inv;
                if vi == 0.0 {
                    continue;
                }
                for j in 0..l {
                    pinv[i * l + j] += vi * eig.vectors[j * l + k];
                }
            }
        }
        Ok(Self { ensemble, gram_pinv: pinv })
    }

    pub fn ensemble(&self) -> &Ensemble {
        self.ensemble
    }

    /// `X - A*(G^+ (A(X) - b))` for `epsilon = 0`. For `epsilon > 0` the
    /// residual `r` is only pulled back onto the ball `||r|| <= epsilon`.
    pub fn project(&self, x: &HermitianMatrix, b: &[f64], epsilon: f64) -> Result<HermitianMatrix> {
        check_len(self.ensemble.len(), b.len())?;
        let ax = self.ensemble.measure_lifted(x)?;
        let mut r: Vec<f64> = ax.values().iter().zip(b).map(|(a, b)| a - b).collect();
        if epsilon > 0.0 {
            let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nr <= epsilon {
                return Ok(x.clone());
            }
            let keep = epsilon / nr;
            r.iter_mut().for_each(|v| *v -= keep * *v);
        }
        let l = r.len();
        let coef: Vec<f64> =
            (0..l).map(|i| self.gram_pinv[i * l..(i + 1) * l].iter().zip(&r).map(|(g, v)| g * v).sum()).collect();
        let mut out = x.clone();
        out.add_scaled(-1.0, &self.ensemble.adjoint(&coef)?);
        Ok(out)
    }

    /// `max(||A(X) - b|| - epsilon, 0)`.
    pub fn residual(&self, x: &HermitianMatrix, b: &[f64], epsilon: f64) -> Result<f64> {
        let ax = self.ensemble.measure_lifted(x)?;
        let nr = ax.values().iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Ok((nr - epsilon).max(0.0))
    }
}

/// One-shot projection; builds the Gram pseudoinverse on every call.
pub fn project_affine(
    ensemble: &Ensemble,
    x: &HermitianMatrix,
    b: &IntensityVector,
    epsilon: f64,
) -> Result<HermitianMatrix> {
    AffineProjector::new(ensemble)?.project(x, b.values(), epsilon)
}

/// Projection scheme of `cfg` started from `A*(b) / L`.
///
/// Running out of iterations is not an error: the result carries
/// `converged = false` and the final residual.
pub fn solve_phaselift(ensemble: &Ensemble, b: &IntensityVector, cfg: &SdpConfig) -> Result<SdpResult> {
    let projector = AffineProjector::new(ensemble)?;
    solve_with(&projector, b, cfg)
}

/// [`solve_phaselift`] with a projector that can be reused across right-hand sides.
pub fn solve_with(projector: &AffineProjector<'_>, b: &IntensityVector, cfg: &SdpConfig) -> Result<SdpResult> {
    cfg.validate()?;
    let ensemble = projector.ensemble();
    check_len(ensemble.len(), b.len())?;
    if let Some(i) = b.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let b = b.values();
    let n = ensemble.dim();
    let floor = cfg.epsilon * 1e-3;
    let res_tol = floor.max(1e-9);
    let identity = HermitianMatrix::identity(n);

    let mut z = ensemble.adjoint(b)?.scale(1.0 / ensemble.len() as f64);
    let mut x = match cfg.scheme {
        Scheme::Alternating => z.clone(),
        Scheme::Reflections => psd_from_eigen(&eig_hermitian(&z)?),
    };
    let mut steps = Vec::new();
    let mut converged = false;
    let mut residual = projector.residual(&x, b, cfg.epsilon)?;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let next = match cfg.scheme {
            Scheme::Alternating => {
                let mut y = projector.project(&x, b, cfg.epsilon)?;
                if cfg.trace_weight > 0.0 {
                    y.add_scaled(-cfg.trace_weight, &identity);
                }
                let next = psd_from_eigen(&eig_hermitian(&y)?);
                steps.push((&next - &x).frobenius_norm());
                next
            }
            Scheme::Reflections => {
                let mut reflected = x.scale(2.0);
                reflected.add_scaled(-1.0, &z);
                let mut a = projector.project(&reflected, b, cfg.epsilon)?;
                if cfg.trace_weight > 0.0 {
                    a.add_scaled(-cfg.trace_weight, &identity);
                }
                let delta = &a - &x;
                steps.push(delta.frobenius_norm());
                z = &z + &delta;
                psd_from_eigen(&eig_hermitian(&z)?)
            }
        };
        let change = (&next - &x).frobenius_norm() / next.frobenius_norm().max(f64::MIN_POSITIVE);
        x = next;
        residual = projector.residual(&x, b, cfg.epsilon)?;
        if change < cfg.tol && residual < res_tol {
            converged = true;
            break;
        }
    }

    let eig = eig_hermitian(&x)?;
    let (l1, u1) = eig.largest();
    let l2 = eig.values.get(1).copied().unwrap_or(0.0);
    let rank1_gap = if l1 <= 0.0 { 1.0 } else { l2.max(0.0) / l1 };
    let x_hat = u1.scale(l1.max(0.0).sqrt().into());
    Ok(SdpResult { x, x_hat, iterations, residual, converged, rank1_gap, steps })
}
