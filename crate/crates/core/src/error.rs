use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function is not strictly positive on the grid (min {min:e} at l = ({l1}, {l2}))")]
    NotPositive { min: f64, l1: usize, l2: usize },

    #[error("dual variable is infeasible (margin {margin:e})")]
    Infeasible { margin: f64 },

    /// The block recursion hit a leading block that is not positive definite.
    #[error("TBT recursion breakdown at block level {level}")]
    Breakdown { level: usize },

    #[error("Schur complement is not positive definite")]
    IndefiniteSchur,

    #[error("matrix is numerically singular")]
    Singular,

    #[error("continuation step underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("denominator vanishes at grid point ({l1}, {l2})")]
    ZeroDenominator { l1: usize, l2: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
