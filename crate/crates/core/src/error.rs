use thiserror::Error;

/// Errors produced by the scheduling and simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration or topology invariant does not hold.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was called outside of its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or allocation dimensions disagree with the configured cell.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scheduled allocation broke one of the C1-C3 constraints.
    #[error("constraint violation in slot {slot}: {detail}")]
    ConstraintViolation { slot: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
