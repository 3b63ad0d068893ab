use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sample too small: need at least 2 observations, got {0}")]
    EmptySample(usize),

    #[error("no positive pairs in the sample")]
    NoPositivePairs,

    #[error("no negative pairs in the sample")]
    NoNegativePairs,

    #[error("class {0} is empty")]
    EmptyClass(usize),

    #[error("infeasible problem: beta = {beta} < -||N||_F = {bound}")]
    Infeasible { beta: f64, bound: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("format error at byte offset {offset}: {msg}")]
    Format { offset: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
