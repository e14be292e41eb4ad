use thiserror::Error;

/// Errors raised by the linear algebra layer, the bound engine and the
/// experiment pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfiError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} of size {requested} exceeds the configured cap of {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "inner supremum over mu is unstable: {coarse} on the search grid, {dense} on the verification grid"
    )]
    MuSearchUnstable { coarse: f64, dense: f64 },

    #[error("record `{name}`: {message}")]
    Record { name: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, QfiError>;
