//! Discrete Fourier transform with the one-based convention
//! `xhat[w] = sum_t x[t] exp(-i 2 pi (w-1)(t-1) / N)`.
//!
//! Direct O(N^2) summation over a precomputed twiddle table; any length works.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::vector::ComplexVector;

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64)).collect()
}

fn transform(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    let w = twiddles(n, sign);
    (0..n).map(|freq| x.iter().enumerate().map(|(t, &v)| v * w[(freq * t) % n]).sum()).collect()
}

pub fn dft(x: &ComplexVector) -> ComplexVector {
    ComplexVector::from_vec_unchecked(transform(x.as_slice(), -1.0))
}

pub fn idft(xhat: &ComplexVector) -> ComplexVector {
    let n = xhat.len() as f64;
    let mut out = transform(xhat.as_slice(), 1.0);
    for z in &mut out {
        *z /= n;
    }
    ComplexVector::from_vec_unchecked(out)
}
