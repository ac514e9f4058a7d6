use thiserror::Error;

/// Errors raised by the estimators, oracles, samplers and experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient samples: need at least {required}, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("degrees of freedom {nu} out of range: {reason}")]
    InvalidDegreesOfFreedom { nu: f64, reason: &'static str },

    #[error("oracle is degenerate: delta2 = 0")]
    DegenerateOracle,

    #[error("theta2 is not available for this population")]
    MissingTheta2,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inconsistent closed forms: {0}")]
    Inconsistent(String),

    #[error("cell (p={p}, n={n}) failed: {source}")]
    CellFailed {
        p: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for violations of a mathematical precondition (too few samples,
    /// degrees of freedom out of range, degenerate population) as opposed to
    /// malformed input.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::InsufficientSamples { .. }
            | Error::InvalidDegreesOfFreedom { .. }
            | Error::DegenerateOracle
            | Error::MissingTheta2
            | Error::NotPositiveSemidefinite { .. } => true,
            Error::CellFailed { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
