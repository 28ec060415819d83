use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} of size {size} exceeds the enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: usize, len: usize },

    #[error("matrix is not binary: entry ({row}, {col}) = {value}")]
    NonBinary { row: usize, col: usize, value: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A checked claim failed at runtime. Always a finding, never expected.
    #[error("bound violation: {0}")]
    Violation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
