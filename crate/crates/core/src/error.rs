use thiserror::Error;

/// Errors raised by the lab. Every variant carries enough context to name the
/// violated bound or the offending location.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// A parameter outside its admissible range.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A point outside the natural domain of a map or grid.
    #[error("domain error: {0}")]
    Domain(String),

    /// A derivative was requested on (or a stencil crosses) a break locus.
    #[error("break set: {0}")]
    BreakSet(String),

    /// The operation is not defined for this variant or gauge.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sample count {got} does not match cell count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    /// The requested evaluation cannot meet its documented accuracy.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// An experiment that has nothing to measure (e.g. all deficits vanish).
    #[error("degenerate experiment: {0}")]
    Degenerate(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
