use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum CmcError {
    /// A coordinate or parameter lies outside the model interval.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a precondition (empty list, non-positive step, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A surface stopped being spacelike; the flat grid index of the first
    /// offending point is reported.
    #[error("geometry error: surface not spacelike at grid point {index} (margin {margin:.3e})")]
    Geometry { index: usize, margin: f64 },

    /// An iteration failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// No upper barrier exists for the requested forcing level.
    #[error("no barrier: {0}")]
    NoBarrier(String),

    /// The operation is only defined for future-infinite models.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Malformed input document (model JSON, surface CSV, run record, ...).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CmcError>;
