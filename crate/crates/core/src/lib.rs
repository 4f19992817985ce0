//! Phase retrieval from intensity measurements.
//!
//! Two deterministic ensembles of `4(N-1)` measurement vectors built from a
//! tight frame of `C^2` admit a closed-form block reconstruction followed by
//! phase stitching. A lifted convex (PSD feasibility) solver, dual
//! certificates, noise-sweep benchmarks and a command-line front end sit on
//! top.

pub mod algebraic;
pub mod bench;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod frames;
pub mod io;
pub mod measurements;
pub mod numerics;
pub mod sdp;

pub use algebraic::{aligned_error, recover, recover_masked, RecoveryReport};
pub use error::{Error, Result};
pub use frames::{standard_frame, TightFrame2};
pub use measurements::{add_noise, build_masks, mask_measure, Ensemble, EnsembleKind, IntensityVector, MaskSet};
pub use numerics::{Complex64, ComplexVector, HermitianMatrix, Rng};
