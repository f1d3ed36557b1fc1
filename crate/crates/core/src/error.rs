use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`Error::Usage`] to exit code 1, [`Error::Validation`] to 2
/// and [`Error::Resource`] to 3.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element does not belong to the group {expected}: {found}")]
    GroupMismatch { expected: String, found: String },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("stage {stage} is beyond the realizable depth {cap}")]
    DepthExceeded { stage: usize, cap: usize },
    #[error("{0} is not in the required set")]
    NotInSet(String),
    #[error("points are not tail-equivalent: {0}")]
    NotTailEquivalent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
