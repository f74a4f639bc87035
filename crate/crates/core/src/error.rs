use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped so that callers (the CLI in particular) can map them
/// onto distinct exit codes: input problems, resource caps, non-convergence
/// and configuration errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid model: {0}")]
    ModelInvalid(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("integer overflow during {0}")]
    Overflow(&'static str),

    #[error("completion overflow: {what} cap of {cap} exceeded")]
    CompletionOverflow { what: &'static str, cap: usize },

    #[error("enumeration cap exceeded: fiber has more than {cap} points")]
    EnumerationCap { cap: usize },

    #[error("fiber is unbounded: cell {cell} has no bounding constraint")]
    UnboundedFiber { cell: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inconsistent fit: cell {cell} has zero expected count but observed {observed}")]
    InconsistentFit { cell: usize, observed: i64 },

    #[error("fit did not converge after {iterations} sweeps (moment gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
