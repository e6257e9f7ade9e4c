//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("grid too coarse to resolve the mollifier: support needs {needed} nodes, grid has {have}")]
    GridTooCoarse { needed: usize, have: usize },

    #[error("initial data inadmissible: {0}")]
    Inadmissible(String),

    #[error("solver blow-up at t = {t:.6e}, node {node} (x = {x:.6e}): non-finite state")]
    BlowUp { t: f64, node: usize, x: f64 },

    #[error("snapshot storage refused: {0}")]
    SnapshotStorage(String),

    #[error("invalid diagnostic input: {0}")]
    Diagnostic(String),

    #[error("invalid study plan: {0}")]
    StudyPlan(String),

    #[error("malformed snapshot data: {0}")]
    SnapshotFormat(String),

    #[error("field shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
