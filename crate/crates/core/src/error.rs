use std::path::PathBuf;

/// Errors produced anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("need at least {needed} consecutive snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("analysis window is empty: {0}")]
    EmptyWindow(String),

    #[error("window [{lo}, {hi}] leaves the grid interior")]
    WindowClipped { lo: f64, hi: f64 },

    #[error("degenerate regularization ladder: {0}")]
    DegenerateLadder(String),

    #[error("invalid figure id {0:?} (expected 1-6, 6a, 6b or 6c)")]
    InvalidFigure(String),

    #[error("cannot allocate {bytes} bytes for a {n}x{n} grid; try a smaller --sizes entry")]
    Allocation { n: usize, bytes: usize },

    #[error("malformed input in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
