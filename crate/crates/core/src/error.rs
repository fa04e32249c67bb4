use thiserror::Error;

/// Errors produced anywhere in the toolchain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("infeasible degree combination: {0}")]
    InfeasibleDegrees(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("network stalled at cycle {cycle}: {detail}")]
    Deadlock { cycle: u64, detail: String },

    #[error("buffer of {b} words cannot hold the switch; minimal feasible size is {min_b}")]
    InfeasibleBuffer { b: usize, min_b: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
