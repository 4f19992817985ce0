use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::vector::{check_len, ComplexVector};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Dense N x N complex Hermitian matrix, row-major.
///
/// Construction checks Hermitian symmetry and stores the exactly symmetrized
/// value, so every instance satisfies `X[m,n] == conj(X[n,m])` bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Validates a row-major grid. Asymmetry beyond `1e-12` relative to the
    /// largest entry is rejected; smaller asymmetry is averaged away.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("matrix dimension must be positive".into()));
        }
        check_len(n * n, data.len())?;
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut asym: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                asym = asym.max((data[r * n + c] - data[c * n + r].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(asym / scale));
        }
        Ok(Self::symmetrized(n, data))
    }

    /// Builds from a grid produced by arithmetic that is Hermitian up to roundoff.
    pub(crate) fn symmetrized(n: usize, mut data: Vec<Complex64>) -> Self {
        for r in 0..n {
            data[r * n + r].im = 0.0;
            for c in (r + 1)..n {
                let avg = 0.5 * (data[r * n + c] + data[c * n + r].conj());
                data[r * n + c] = avg;
                data[c * n + r] = avg.conj();
            }
        }
        Self { n, data }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (k, &v) in values.iter().enumerate() {
            m.data[k * n + k] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The rank-one matrix `x x*`.
    pub fn outer(x: &ComplexVector) -> Self {
        let n = x.len();
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(x[r] * x[c].conj());
            }
        }
        Self::symmetrized(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|k| self.data[k * self.n + k].re).sum()
    }

    /// Hilbert-Schmidt inner product `trace(Y* X)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianMatrix) -> Result<f64> {
        check_len(self.n, other.n)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a * b.conj()).re).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        let eig = super::eigen::eig_hermitian(self)?;
        Ok(eig.values.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.n, x.len())?;
        let n = self.n;
        let out = (0..n).map(|r| (0..n).map(|c| self.data[r * n + c] * x[c]).sum()).collect();
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// `x* X x`.
    pub fn quadratic_form(&self, x: &ComplexVector) -> Result<f64> {
        let xx = self.mul_vec(x)?;
        Ok(super::vector::inner_slices(xx.as_slice(), x.as_slice()).re)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self + s * other`, in place.
    pub fn add_scaled(&mut self, s: f64, other: &HermitianMatrix) {
        assert_eq!(self.n, other.n, "add_scaled dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Adds `s * v v*` restricted to the given support of `v`.
    pub(crate) fn add_outer_sparse(&mut self, s: f64, v: &ComplexVector, support: &[usize]) {
        let n = self.n;
        for &r in support {
            for &c in support {
                self.data[r * n + c] += v[r] * v[c].conj() * s;
            }
        }
    }

    /// `v* X v` over the support of `v`.
    pub(crate) fn quadratic_form_sparse(&self, v: &ComplexVector, support: &[usize]) -> f64 {
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for &r in support {
            let mut row = Complex64::new(0.0, 0.0);
            for &c in support {
                row += self.data[r * n + c] * v[c];
            }
            acc += v[r].conj() * row;
        }
        acc.re
    }

    /// Real coordinates in which the Hilbert-Schmidt inner product is the
    /// Euclidean one: diagonal entries, then `sqrt(2) Re` and `sqrt(2) Im` of
    /// each strictly upper entry in row-major order. Length `N^2`.
    pub fn to_real_coords(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            out.push(self.data[k * n + k].re);
        }
        let s = std::f64::consts::SQRT_2;
        for r in 0..n {
            for c in (r + 1)..n {
                let z = self.data[r * n + c];
                out.push(s * z.re);
                out.push(s * z.im);
            }
        }
        out
    }

    pub fn from_real_coords(n: usize, coords: &[f64]) -> Result<Self> {
        check_len(n * n, coords.len())?;
        let mut m = Self::zeros(n);
        for (k, &d) in coords[..n].iter().enumerate() {
            m.data[k * n + k] = Complex64::new(d, 0.0);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut idx = n;
        for r in 0..n {
            for c in (r + 1)..n {
                let z = Complex64::new(s * coords[idx], s * coords[idx + 1]);
                m.data[r * n + c] = z;
                m.data[c * n + r] = z.conj();
                idx += 2;
            }
        }
        Ok(m)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, s: f64) -> HermitianMatrix {
        self.scale(s)
    }
}
