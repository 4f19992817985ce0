//! Measurement ensembles, the quadratic and lifted measurement maps, the
//! additive intensity-noise model, and the mask/DFT realization.
//!
//! Deterministic ensembles hold `4(N-1)` vectors laid out as
//! `l = 4(n-1) + m` for frame index `m = 1..4` and block `n = 1..N-1`
//! (zero-based: `l = 4 * block + m`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{standard_frame, FRAME_SIZE};
use crate::numerics::{check_len, dft, gaussian_complex, ComplexVector, HermitianMatrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// Consecutive pairs `(x[n], x[n+1])`.
    Phi,
    /// Hub pairs `(x[1], x[n+1])`.
    Psi,
    /// Unit-norm complex Gaussian directions.
    Random,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Phi => "phi",
            EnsembleKind::Psi => "psi",
            EnsembleKind::Random => "random",
        }
    }

    pub fn is_deterministic(self) -> bool {
        !matches!(self, EnsembleKind::Random)
    }

    /// Zero-based positions `(first, second)` of the 2-vector seen by block `block`.
    pub(crate) fn block_support(self, block: usize) -> (usize, usize) {
        match self {
            EnsembleKind::Phi => (block, block + 1),
            EnsembleKind::Psi => (0, block + 1),
            EnsembleKind::Random => panic!("random ensembles have no block structure"),
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(EnsembleKind::Phi),
            "psi" => Ok(EnsembleKind::Psi),
            "random" => Ok(EnsembleKind::Random),
            other => Err(Error::InvalidConfig(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// Number of deterministic measurements for dimension `n`.
pub fn deterministic_len(n: usize) -> usize {
    FRAME_SIZE * (n - 1)
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    kind: EnsembleKind,
    dim: usize,
    vectors: Vec<ComplexVector>,
    supports: Vec<Vec<usize>>,
}

impl Ensemble {
    /// The deterministic `4(N-1)` ensemble of the given kind.
    pub fn build(kind: EnsembleKind, n: usize) -> Result<Self> {
        if kind == EnsembleKind::Random {
            return Err(Error::InvalidConfig("random ensembles are built with Ensemble::random".into()));
        }
        if n < 2 {
            return Err(Error::InvalidDimension(format!("deterministic ensembles need N >= 2, got {n}")));
        }
        let frame = standard_frame();
        let mut vectors = Vec::with_capacity(deterministic_len(n));
        for block in 0..n - 1 {
            let (i, j) = kind.block_support(block);
            for m in 0..FRAME_SIZE {
                let a = frame.vector(m);
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[i] = a[0];
                v[j] = a[1];
                vectors.push(ComplexVector::from_vec_unchecked(v));
            }
        }
        Ok(Self::assemble(kind, n, vectors))
    }

    /// `l` unit-norm complex Gaussian directions in `C^n`.
    pub fn random(rng: &mut Rng, n: usize, l: usize) -> Result<Self> {
        if n < 1 || l < 1 {
            return Err(Error::InvalidDimension(format!("random ensemble needs N >= 1 and L >= 1, got N={n}, L={l}")));
        }
        let mut vectors = Vec::with_capacity(l);
        while vectors.len() < l {
            if let Some(v) = gaussian_complex(rng, n, 1.0).normalized() {
                vectors.push(v);
            }
        }
        Ok(Self::assemble(EnsembleKind::Random, n, vectors))
    }

    /// Wraps explicit vectors, e.g. read back from a file.
    pub fn from_vectors(kind: EnsembleKind, n: usize, vectors: Vec<ComplexVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidDimension("ensemble needs at least one vector".into()));
        }
        for v in &vectors {
            check_len(n, v.len())?;
        }
        if kind.is_deterministic() {
            if n < 2 {
                return Err(Error::InvalidDimension(format!("deterministic ensembles need N >= 2, got {n}")));
            }
            check_len(deterministic_len(n), vectors.len())?;
        }
        Ok(Self::assemble(kind, n, vectors))
    }

    fn assemble(kind: EnsembleKind, dim: usize, vectors: Vec<ComplexVector>) -> Self {
        let supports =
            vectors.iter().map(|v| (0..dim).filter(|&k| v[k] != Complex64::new(0.0, 0.0)).collect()).collect();
        Self { kind, dim, vectors, supports }
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    /// Indices of the nonzero entries of vector `l`.
    pub fn support(&self, l: usize) -> &[usize] {
        &self.supports[l]
    }

    /// Zero-based measurement index of frame vector `m` in block `block`.
    pub fn index(m: usize, block: usize) -> usize {
        FRAME_SIZE * block + m
    }

    /// `b[l] = |<x, v_l>|^2`.
    pub fn measure(&self, x: &ComplexVector) -> Result<IntensityVector> {
        check_len(self.dim, x.len())?;
        let values = self
            .vectors
            .iter()
            .zip(&self.supports)
            .map(|(v, sup)| sup.iter().map(|&k| x[k] * v[k].conj()).sum::<Complex64>().norm_sqr())
            .collect();
        Ok(IntensityVector::new(values))
    }

    /// `A(X)[l] = <X, v_l v_l*>`.
    pub fn measure_lifted(&self, x: &HermitianMatrix) -> Result<IntensityVector> {
        check_len(self.dim, x.dim())?;
        let values = self.vectors.iter().zip(&self.supports).map(|(v, sup)| x.quadratic_form_sparse(v, sup)).collect();
        Ok(IntensityVector::new(values))
    }

    /// `A*(b) = sum_l b[l] v_l v_l*`.
    pub fn adjoint(&self, b: &[f64]) -> Result<HermitianMatrix> {
        check_len(self.len(), b.len())?;
        let mut out = HermitianMatrix::zeros(self.dim);
        for ((v, sup), &bl) in self.vectors.iter().zip(&self.supports).zip(b) {
            if bl != 0.0 {
                out.add_outer_sparse(bl, v, sup);
            }
        }
        Ok(HermitianMatrix::symmetrized(self.dim, out.as_slice().to_vec()))
    }

    /// Row-major `L x L` Gram matrix `G = A A*`, `G[l,k] = |<v_l, v_k>|^2`.
    pub fn gram(&self) -> Vec<f64> {
        let l = self.len();
        let mut g = vec![0.0; l * l];
        for i in 0..l {
            for j in i..l {
                let ip: Complex64 =
                    self.supports[i].iter().map(|&k| self.vectors[i][k] * self.vectors[j][k].conj()).sum();
                g[i * l + j] = ip.norm_sqr();
                g[j * l + i] = ip.norm_sqr();
            }
        }
        g
    }

    /// The real `L x N^2` matrix of the lifted map in the coordinates of
    /// [`HermitianMatrix::to_real_coords`], row-major.
    pub fn lifted_matrix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim * self.dim);
        for v in &self.vectors {
            out.extend(HermitianMatrix::outer(v).to_real_coords());
        }
        out
    }
}

/// Intensity measurements, possibly noisy (then entries may be negative).
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityVector {
    values: Vec<f64>,
    noise_variance: Option<f64>,
}

impl IntensityVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, noise_variance: None }
    }

    pub fn with_noise_variance(values: Vec<f64>, noise_variance: f64) -> Self {
        Self { values, noise_variance: Some(noise_variance) }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn noise_variance(&self) -> Option<f64> {
        self.noise_variance
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `b + nu` with `nu[l] ~ N(0, sigma_nu2)` i.i.d.
pub fn add_noise(b: &IntensityVector, sigma_nu2: f64, rng: &mut Rng) -> Result<IntensityVector> {
    if !sigma_nu2.is_finite() || sigma_nu2 < 0.0 {
        return Err(Error::InvalidConfig(format!("noise variance must be finite and >= 0, got {sigma_nu2}")));
    }
    let sd = sigma_nu2.sqrt();
    let values = b.values.iter().map(|&v| if sd == 0.0 { v } else { v + sd * rng.standard_normal() }).collect();
    Ok(IntensityVector::with_noise_variance(values, sigma_nu2))
}

/// Four transmittance masks realizing an ensemble through `|DFT(x p_m)|^2`.
#[derive(Debug, Clone)]
pub struct MaskSet {
    kind: EnsembleKind,
    masks: [ComplexVector; FRAME_SIZE],
}

impl MaskSet {
    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.masks[0].len()
    }

    pub fn masks(&self) -> &[ComplexVector; FRAME_SIZE] {
        &self.masks
    }
}

/// Phi: `p_m[t] = conj(a_m[1]) + conj(a_m[2]) exp(-i 2 pi (t-1) / N)`.
/// Psi: `p_m[t] = conj(a_m[1]) delta[t] + conj(a_m[2])`.
pub fn build_masks(kind: EnsembleKind, n: usize) -> Result<MaskSet> {
    if !kind.is_deterministic() {
        return Err(Error::InvalidConfig("masks exist only for phi and psi".into()));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("masks need N >= 2, got {n}")));
    }
    let frame = standard_frame();
    let masks = std::array::from_fn(|m| {
        let a = frame.vector(m);
        let entries = (0..n)
            .map(|t| match kind {
                EnsembleKind::Phi => {
                    let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t as f64 / n as f64);
                    a[0].conj() + a[1].conj() * w
                }
                _ => {
                    let delta = if t == 0 { a[0].conj() } else { Complex64::new(0.0, 0.0) };
                    delta + a[1].conj()
                }
            })
            .collect();
        ComplexVector::from_vec_unchecked(entries)
    });
    Ok(MaskSet { kind, masks })
}

/// Intensities `|DFT(x p_m)[n]|^2` in the ensemble ordering.
///
/// Phi yields `4(N-1)` values (`n = 1..N-1`) that equal the Phi ensemble
/// applied to `dft(x)`. Psi yields `4N` values (`n = 1..N`) that equal the Psi
/// ensemble of `C^{N+1}` applied to [`augmented_signal`].
pub fn mask_measure(x: &ComplexVector, masks: &MaskSet) -> Result<IntensityVector> {
    check_len(masks.dim(), x.len())?;
    let n = x.len();
    let blocks = match masks.kind {
        EnsembleKind::Phi => n - 1,
        _ => n,
    };
    let spectra: Vec<ComplexVector> = masks
        .masks
        .iter()
        .map(|p| {
            let y = x.as_slice().iter().zip(p).map(|(a, b)| a * b).collect();
            dft(&ComplexVector::from_vec_unchecked(y))
        })
        .collect();
    let mut values = Vec::with_capacity(FRAME_SIZE * blocks);
    for block in 0..blocks {
        for spec in &spectra {
            values.push(spec[block].norm_sqr());
        }
    }
    Ok(IntensityVector::new(values))
}

/// `(x[1], xhat[1], ..., xhat[N])`, the `C^{N+1}` vector the Psi masks measure.
pub fn augmented_signal(x: &ComplexVector) -> ComplexVector {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(x[0]);
    out.extend_from_slice(dft(x).as_slice());
    ComplexVector::from_vec_unchecked(out)
}

/// Phi: `|x[n]| > mu` for `n = 2..N-1`. Psi: `|x[1]| > mu`. Random ensembles
/// carry no structural guarantee and always report `true` for nonzero `x`.
pub fn in_recoverable_set(kind: EnsembleKind, x: &ComplexVector, mu: f64) -> bool {
    let n = x.len();
    match kind {
        EnsembleKind::Phi => (1..n.saturating_sub(1)).all(|k| x[k].norm() > mu),
        EnsembleKind::Psi => x[0].norm() > mu,
        EnsembleKind::Random => x.norm() > 0.0,
    }
}
