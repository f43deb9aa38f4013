use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite input at index {index}")]
    NonFiniteInput { index: usize },

    #[error("insufficient data: {usable} usable points, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("degenerate regressor: all x values are identical")]
    DegenerateRegressor,

    #[error("non-finite error field at step {step} (max |e| = {max_abs:e})")]
    NonFiniteField { step: usize, max_abs: f64 },

    #[error("diverged at step {step}: max |w| = {max_abs:e}")]
    Diverged { step: usize, max_abs: f64 },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: u64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
