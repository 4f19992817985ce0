use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge (off-diagonal residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("every block estimate is degenerate (all largest eigenvalues <= 0)")]
    AllDegenerate,

    #[error("signal outside the recoverable set: {0}")]
    OutsideRecoverableSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::AllDegenerate)
    }
}
