use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A chain of eigenvalues is pairwise within tolerance but spans far more
    /// than the tolerance, so clustering would depend on the visiting order.
    #[error("ambiguous eigenvalue cluster around {center} (spread {spread:e} > 10 x tol {tol:e}); adjust the tolerance")]
    AmbiguousCluster { center: String, spread: f64, tol: f64 },

    #[error("unsupported Jordan structure: {0}")]
    UnsupportedJordanStructure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reduction would leave an empty network")]
    EmptyReduction,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical kernels (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure(_)
                | Error::Numerical(_)
                | Error::AmbiguousCluster { .. }
                | Error::UnsupportedJordanStructure(_)
                | Error::Domain(_)
                | Error::EmptyReduction
        )
    }
}
