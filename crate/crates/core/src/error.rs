use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum MhdError {
    #[error("nonpositive density ({0})")]
    NonpositiveDensity(f64),
    #[error("non-finite state entry")]
    NonFinite,
    #[error("inadmissible state: {0}")]
    Inadmissible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported polynomial degree {0} (supported: 0, 1, 2)")]
    UnsupportedDegree(usize),
    #[error("quadrature size {0} out of range")]
    QuadratureSize(usize),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("CFL violation: dt={dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("positivity failure: {0}")]
    PositivityFailure(String),
    #[error("unknown problem id '{id}'; valid ids: {valid}")]
    UnknownProblem { id: String, valid: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MhdError>;
