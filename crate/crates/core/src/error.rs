use alloc::string::String;

/// Errors raised by the core computations.
///
/// Validation outcomes (axiom failures, refutations) are *not* errors; they
/// travel inside reports so callers can inspect witnesses.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller violated a precondition (mixed groups, bad shapes, `e ∈ F`, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// A configured size cap would be exceeded.
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    Resource {
        what: &'static str,
        needed: usize,
        cap: usize,
    },
    /// The requested construction is not available for this group family.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical decomposition could not separate eigenvalues.
    #[error("indeterminate: {0}")]
    Indeterminate(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
