use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is too large for exhaustive search: n = {n} exceeds cap {cap}")]
    SearchCapExceeded { n: usize, cap: usize },

    #[error("random regular generation failed after {0} attempts")]
    RetryCapExceeded(usize),

    #[error("graph is not regular and symmetric: {0}")]
    NotRegular(String),

    #[error("fixed point bracket has no sign change for K = {0}")]
    NoSignChange(f64),

    #[error("step budget exceeded: {steps} steps requested, cap is {cap}")]
    BudgetExceeded { steps: u64, cap: u64 },

    #[error("mean-field solver blew up at t = {time}: |c_{mode}| = {magnitude}")]
    BlowUp {
        time: f64,
        mode: usize,
        magnitude: f64,
    },
}
