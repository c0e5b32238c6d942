use thiserror::Error;

/// Errors raised by the library. Every variant is a domain error in the
/// sense that the inputs fall outside an operation's preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector is empty")]
    EmptyVector,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("matrix shape {rows}x{cols} is invalid: {reason}")]
    Shape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("operation needs at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("operation needs at least {needed} columns, got {got}")]
    TooFewColumns { needed: usize, got: usize },
    #[error("augmented matrix is not a one-column extension of the base matrix: {0}")]
    NotExtension(String),
    #[error("sequence is not a permutation of 1..={0}")]
    NotPermutation(usize),
    #[error("coefficient {0} is not supported here: {1}")]
    UnsupportedCoefficient(String, &'static str),
    #[error("invalid coefficient syntax {0:?}")]
    CoefficientSyntax(String),
    #[error("matrix orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("requested precision is not supported: {0}")]
    Precision(String),
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: u64, col: usize, msg: String },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
