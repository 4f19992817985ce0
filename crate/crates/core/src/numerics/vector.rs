use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite complex vector of fixed length.
///
/// Indexing is zero-based: `x[0]` is the first sample of the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("vector must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(entries))
    }

    /// Builds from entries known to be finite (internal arithmetic results).
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Canonical basis vector with a one at zero-based position `k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other> = sum_n self[n] * conj(other[n])`.
    pub fn inner(&self, other: &ComplexVector) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(inner_slices(&self.0, &other.0))
    }

    pub fn scale(&self, c: Complex64) -> ComplexVector {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn sub(&self, other: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Returns the vector scaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<ComplexVector> {
        let nrm = self.norm();
        if nrm == 0.0 {
            None
        } else {
            Some(self.scale(Complex64::new(1.0 / nrm, 0.0)))
        }
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl AsRef<[Complex64]> for ComplexVector {
    fn as_ref(&self) -> &[Complex64] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a ComplexVector {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn inner_slices(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}
