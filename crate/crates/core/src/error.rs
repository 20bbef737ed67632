use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed angle specification (empty list, zero coefficient, bad string).
    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    /// A caller asked for more continued-fraction depth than the angle carries.
    #[error("depth {requested} exceeds working depth {available}")]
    DepthExceeded { requested: usize, available: usize },

    /// The certified error bound of a computation exceeds the relative budget.
    /// Raising the guard depth (where the angle allows it) and retrying is the
    /// intended recovery.
    #[error("precision budget exceeded: {0}")]
    PrecisionBudget(String),

    /// Argument outside an operation's contract (k = 0, m <= k, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal oracle cross-check failed. Never silently patched.
    #[error("cross-validation failure: {0}")]
    CrossValidation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
