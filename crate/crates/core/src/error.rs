use thiserror::Error;

use crate::lp::LpError;

/// Errors produced by the game, polyhedra and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid grid step: {0}")]
    InvalidStep(String),

    #[error("empty point set")]
    EmptyInput,

    #[error("polyhedra have different orientations")]
    OrientationMismatch,

    #[error("support value is unbounded in direction {0:?}")]
    UnboundedDirection(Vec<f64>),

    #[error("point {0:?} is not a vertex of the polyhedron")]
    VertexNotFound(Vec<f64>),

    #[error("exposing hyperplane check failed at vertex {vertex:?}: {detail}")]
    ExposureFailed { vertex: Vec<f64>, detail: String },

    #[error("double description failed: {0}")]
    DoubleDescription(String),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("iteration cap of {0} reached")]
    IterationCap(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T> = std::result::Result<T, Error>;
