use thiserror::Error;

/// Errors produced by the estimator, the theory toolkit and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The trigonometric basis is only orthonormal on the grid `j/n` for odd `n`.
    #[error("unsupported design: n = {0} is even, only odd sample sizes are supported")]
    EvenDesign(usize),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("weight family is empty")]
    EmptyFamily,

    #[error("test function lies outside W^{k}_{r}: membership margin {margin:.6e}")]
    OutsideBall { k: u32, r: f64, margin: f64 },

    #[error("least-favorable prior is infeasible: {0}")]
    InfeasiblePrior(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
