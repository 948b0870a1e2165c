use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("region {region}: {reason}")]
    Medium { region: usize, reason: String },

    #[error("function does not decay: {0}")]
    NonDecaying(String),

    #[error("conjugate gradient breakdown at iteration {iteration}: p'Bp = {curvature:e} (operator not positive definite)")]
    IndefiniteOperator { iteration: usize, curvature: f64 },

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("singular matrix: zero pivot in column {0}")]
    Singular(usize),

    #[error("inner solve failed at Laguerre index {index}: {source}")]
    InnerSolve {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
