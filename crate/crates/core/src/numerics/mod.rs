//! Complex linear-algebra substrate: vectors, Hermitian matrices, DFT,
//! eigensolvers, PSD projection, SVD and seeded randomness.

mod dft;
mod eigen;
mod hermitian;
mod rng;
pub mod svd;
mod vector;

pub use dft::{dft, idft};
pub use eigen::{
    eig2_hermitian, eig_hermitian, project_psd, EigenDecomposition, EIG_MAX_DIM, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL,
};
pub(crate) use eigen::{jacobi_symmetric, psd_from_eigen};
pub use hermitian::HermitianMatrix;
pub use num_complex::Complex64;
pub use rng::{gaussian_complex, Rng};
pub(crate) use vector::check_len;
pub use vector::ComplexVector;
