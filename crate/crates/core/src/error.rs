use thiserror::Error;

/// Errors raised across the workbench.
///
/// The variants are grouped so that front ends can map them onto stable exit
/// codes: validation-type problems, desk-scale resource caps, solver
/// convergence and failed certificates.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown tensor factor label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate tensor factor label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("solver stopped after {iterations} iterations (best gap {gap:e}): {reason}")]
    Convergence {
        iterations: usize,
        gap: f64,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
