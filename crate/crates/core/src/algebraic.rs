//! Linear-time recovery for the deterministic ensembles.
//!
//! Each block of four intensities determines the rank-one matrix `x_n x_n*`
//! of a 2-vector through the frame identity. Factorizing it gives `x_n` up to
//! a phase, and the phases are then stitched together: along the chain of
//! overlapping entries for Phi, and against the shared first entry for Psi.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{standard_frame, FRAME_SIZE};
use crate::measurements::{deterministic_len, EnsembleKind, IntensityVector, MaskSet};
use crate::numerics::{check_len, eig2_hermitian, idft, ComplexVector, HermitianMatrix};

/// Entries at or below this fraction of a block's norm are treated as zero
/// when a phase has to be read off them.
pub const PHASE_REL_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct BlockEstimate {
    /// Zero-based block index.
    pub index: usize,
    pub q: HermitianMatrix,
    pub lambda_max: f64,
    /// `sqrt(max(lambda_max, 0)) u`.
    pub vec: [Complex64; 2],
    pub degenerate: bool,
}

impl BlockEstimate {
    pub fn norm(&self) -> f64 {
        (self.vec[0].norm_sqr() + self.vec[1].norm_sqr()).sqrt()
    }

    fn has_phase(&self, k: usize) -> bool {
        !self.degenerate && self.vec[k].norm() > PHASE_REL_TOL * self.norm()
    }
}

/// Rank-one reconstruction and factorization of one block.
pub fn block_reconstruct(index: usize, b: &[f64; FRAME_SIZE]) -> BlockEstimate {
    let q = standard_frame().reconstruct_rank1(b);
    let (vec, lambda_max) = factorize(&q);
    BlockEstimate { index, q, lambda_max, vec, degenerate: lambda_max <= 0.0 }
}

/// Best rank-one factor `sqrt(max(lambda, 0)) u` of a 2 x 2 Hermitian matrix,
/// together with `lambda`.
pub fn factorize(q: &HermitianMatrix) -> ([Complex64; 2], f64) {
    let eig = eig2_hermitian(q);
    let (lam, u) = eig.largest();
    if lam <= 0.0 {
        return ([ZERO; 2], lam);
    }
    let s = lam.sqrt();
    ([u[0] * s, u[1] * s], lam)
}

/// Output of a stitching pass.
#[derive(Debug, Clone)]
pub struct Stitched {
    pub x_hat: ComplexVector,
    /// Phi: zero-based index `k` of every block whose phase could not be
    /// linked to block `k - 1`. Psi: blocks whose first entry vanished.
    pub broken: Vec<usize>,
}

fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Phase propagation along the chain `(x[n], x[n+1])`, `n = 1..N-1`.
pub fn stitch_phi(blocks: &[BlockEstimate]) -> Stitched {
    assert!(!blocks.is_empty(), "stitching needs at least one block");
    let nb = blocks.len();
    let mut rot = vec![Complex64::new(1.0, 0.0); nb];
    let mut broken = Vec::new();
    rot[0] = unit(blocks[0].vec[0]).conj();
    for k in 1..nb {
        let (prev, cur) = (&blocks[k - 1], &blocks[k]);
        if prev.has_phase(1) && cur.has_phase(0) {
            let target = unit(rot[k - 1] * prev.vec[1]);
            rot[k] = target * unit(cur.vec[0]).conj();
        } else {
            broken.push(k);
        }
    }

    let mut x = vec![ZERO; nb + 1];
    x[0] = rot[0] * blocks[0].vec[0];
    for (k, xk) in x.iter_mut().enumerate().skip(1) {
        let mut acc = ZERO;
        let mut count = 0.0;
        if !blocks[k - 1].degenerate {
            acc += rot[k - 1] * blocks[k - 1].vec[1];
            count += 1.0;
        }
        if k < nb && !blocks[k].degenerate {
            acc += rot[k] * blocks[k].vec[0];
            count += 1.0;
        }
        if count > 0.0 {
            *xk = acc / count;
        }
    }
    Stitched { x_hat: ComplexVector::from_vec_unchecked(x), broken }
}

/// Phase alignment against the shared first entry, blocks `(x[1], x[n+1])`.
pub fn stitch_psi(blocks: &[BlockEstimate]) -> Stitched {
    assert!(!blocks.is_empty(), "stitching needs at least one block");
    let nb = blocks.len();
    let mut x = vec![ZERO; nb + 1];
    let mut broken = Vec::new();
    let mut hub = 0.0;
    let mut hub_count = 0.0;
    for (k, blk) in blocks.iter().enumerate() {
        if blk.degenerate {
            continue;
        }
        if blk.has_phase(0) {
            let rot = unit(blk.vec[0]).conj();
            hub += blk.vec[0].norm();
            x[k + 1] = rot * blk.vec[1];
        } else {
            broken.push(k);
            hub += blk.vec[0].norm();
            x[k + 1] = blk.vec[1];
        }
        hub_count += 1.0;
    }
    if hub_count > 0.0 {
        x[0] = Complex64::new(hub / hub_count, 0.0);
    }
    Stitched { x_hat: ComplexVector::from_vec_unchecked(x), broken }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub kind: EnsembleKind,
    pub x_hat: ComplexVector,
    pub blocks: Vec<BlockEstimate>,
    pub degenerate_count: usize,
    /// See [`Stitched::broken`].
    pub broken: Vec<usize>,
}

/// Recovers `x` (up to a global phase) from the `4(N-1)` intensities of the
/// Phi or Psi ensemble.
///
/// Phase convention: Phi makes the first entry of block 1 real and
/// nonnegative, Psi makes `x_hat[1]` real and nonnegative. Signals outside the
/// recoverable set still produce a report, with no exactness guarantee.
pub fn recover(kind: EnsembleKind, b: &IntensityVector, n: usize) -> Result<RecoveryReport> {
    if !kind.is_deterministic() {
        return Err(Error::InvalidConfig("algebraic recovery needs the phi or psi ensemble".into()));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("algebraic recovery needs N >= 2, got {n}")));
    }
    check_len(deterministic_len(n), b.len())?;
    let blocks: Vec<BlockEstimate> = b
        .values()
        .chunks_exact(FRAME_SIZE)
        .enumerate()
        .map(|(k, c)| block_reconstruct(k, &[c[0], c[1], c[2], c[3]]))
        .collect();
    let degenerate_count = blocks.iter().filter(|b| b.degenerate).count();
    if degenerate_count == blocks.len() {
        return Err(Error::AllDegenerate);
    }
    let stitched = match kind {
        EnsembleKind::Phi => stitch_phi(&blocks),
        _ => stitch_psi(&blocks),
    };
    Ok(RecoveryReport { kind, x_hat: stitched.x_hat, blocks, degenerate_count, broken: stitched.broken })
}

/// Recovery from mask intensities produced by [`crate::measurements::mask_measure`].
///
/// Phi masks measure `dft(x)` through the Phi ensemble; Psi masks measure
/// `(x[1], dft(x))` through the Psi ensemble of `C^{N+1}`. The spectrum is
/// recovered first and inverted. The report's blocks refer to that spectrum.
pub fn recover_masked(b: &IntensityVector, masks: &MaskSet) -> Result<RecoveryReport> {
    let n = masks.dim();
    let kind = masks.kind();
    let (lifted_dim, skip) = match kind {
        EnsembleKind::Phi => (n, 0),
        _ => (n + 1, 1),
    };
    let mut report = recover(kind, b, lifted_dim)?;
    let spectrum = ComplexVector::from_vec_unchecked(report.x_hat.as_slice()[skip..].to_vec());
    report.x_hat = idft(&spectrum);
    Ok(report)
}

/// `min_{|c|=1} ||x - c x_hat||^2`.
///
/// Equal to `||x||^2 + ||x_hat||^2 - 2 |<x, x_hat>|`, but evaluated at the
/// minimizer `c = <x, x_hat> / |<x, x_hat>|` so that tiny errors do not drown
/// in cancellation.
pub fn aligned_error(x: &ComplexVector, x_hat: &ComplexVector) -> Result<f64> {
    let ip = x.inner(x_hat)?;
    let c = unit(ip);
    Ok(x.iter().zip(x_hat.iter()).map(|(a, b)| (a - c * b).norm_sqr()).sum())
}
