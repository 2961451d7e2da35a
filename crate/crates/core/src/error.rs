use thiserror::Error;

/// Errors raised by the engine. Law violations are never errors: they are
/// reported as data by the various `check_*`/`verify_*` operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed tables: dangling ids, wrong arities, missing entries.
    #[error("structural error: {0}")]
    Structural(String),

    /// An enumeration would exceed the configured budget.
    #[error("enumeration too large: {what} needs {needed} candidates, budget is {budget}")]
    TooLarge {
        what: String,
        needed: u128,
        budget: u64,
    },

    #[error("base mismatch: {0}")]
    BaseMismatch(String),

    #[error("coefficient kind mismatch: {0}")]
    KindMismatch(String),

    #[error("not enumerable: {0}")]
    NotEnumerable(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An identity guaranteed by construction failed to hold.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
