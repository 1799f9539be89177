use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A detection was rejected before any engine state changed.
    #[error("invalid detection: {0}")]
    InvalidDetection(String),

    /// Parameter bundle violates its constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Covariance matrix is not symmetric positive-definite.
    #[error("covariance is not symmetric positive-definite")]
    NonSpdCovariance,

    /// Information matrix is singular or near-singular; the position
    /// estimate cannot be recovered.
    #[error("information state is not recoverable (singular information matrix)")]
    UnrecoverableState,

    /// A spatial index mutation violated its precondition. This is an
    /// engine bug surface, not a user input error.
    #[error("spatial index inconsistency: {0}")]
    IndexInconsistency(String),

    /// Fixed-radius queries must not exceed the grid cell size.
    #[error("query radius {radius} exceeds index cell size {cell_size}")]
    RadiusExceedsCellSize { radius: f64, cell_size: f64 },

    /// A detection stream line failed to parse or validate.
    #[error("malformed detection stream at line {line}: {message}")]
    MalformedStream { line: usize, message: String },

    /// A metric has no defined value on the given input (e.g. RMSE with
    /// zero matched pairs). Distinct from a value of zero.
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    /// Too few samples for a statistical test.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// Caller violated an interface contract (e.g. a checkpoint series
    /// whose detection counts do not strictly increase).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An internal invariant failed. Always a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
