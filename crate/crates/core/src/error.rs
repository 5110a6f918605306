use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A symmetry configuration violates one of its admissibility conditions.
    #[error("invalid symmetry configuration: {0}")]
    InvalidConfig(String),

    /// Problem parameters (p, a, b) outside the admissible range.
    #[error("invalid problem parameters: {0}")]
    InvalidParams(String),

    /// Two objects built for different symmetry configurations were combined.
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The solver could not proceed (zero field, non-finite energy, ...).
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
