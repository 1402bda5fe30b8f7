use thiserror::Error;

/// Errors raised across the library. Domain violations carry the violated
/// precondition by name so the CLI can surface it with exit code 3.
#[derive(Debug, Error)]
pub enum QitError {
    #[error("register label collision: {0}")]
    LabelCollision(String),
    #[error("unknown register label: {0}")]
    UnknownLabel(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operator is not Hermitian (relative Frobenius defect {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("trace out of range: {0}")]
    InvalidTrace(f64),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("scalar function undefined on eigenvalue {0:.6e}")]
    FunctionUndefined(f64),
    #[error("dimension cutoff exceeded: {0}")]
    Cutoff(String),
    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
    #[error("accumulation overflow in type-class sweep")]
    Overflow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for QitError {
    fn from(e: serde_json::Error) -> Self {
        QitError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QitError>;
