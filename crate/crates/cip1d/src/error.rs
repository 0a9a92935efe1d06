use std::path::PathBuf;

/// Errors produced by the solvers and the file plumbing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invariant violation at node {index}: {reason}")]
    Invariant { index: usize, reason: String },

    #[error("series length {0} is too short, length ≥ 2 required")]
    ShortSeries(usize),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("CFL violated: dt={dt} exceeds dx·min√ε={limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("nonpositive value: {0}")]
    Nonpositive(String),

    #[error("parse failure in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
