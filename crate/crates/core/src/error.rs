use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} is not supported: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The limit field is undefined at `u = 0`.
    #[error("the limit field is singular at u = 0")]
    SingularInput,

    #[error("window [{start}, {end}] is outside the recorded history [0, {horizon}]")]
    OutsideHistory { start: f64, end: f64, horizon: f64 },

    #[error(
        "fixed-point iteration did not converge at step {step} (t = {t}): \
         residual {residual:e} after {iterations} iterations"
    )]
    FixedPointDivergence {
        step: usize,
        t: f64,
        residual: f64,
        iterations: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
