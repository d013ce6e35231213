use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ill-conditioned matrix: condition number {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },
    #[error("step too large: {0}")]
    StepTooLarge(String),
    #[error("degenerate eigenvalue: {0}")]
    DegenerateEigenvalue(String),
    #[error("contour unsafe: {0}")]
    ContourUnsafe(String),
    #[error("unstable defect at ({x}, {y}): {reason}")]
    UnstableDefect { x: f64, y: f64, reason: String },
    #[error("degenerate zero set: {0}")]
    DegenerateZeroSet(String),
    #[error("empty fit: {0}")]
    EmptyFit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
