use thiserror::Error;

use crate::solver::StepRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} outside supported range 2..=8")]
    Dimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("metric not invertible")]
    NotInvertible,

    #[error("form not in positive cone")]
    NotPositive,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("left cone of (n-1)-PSH admissibility (min cone margin {margin:e})")]
    ConeViolation { margin: f64 },

    #[error("scale down u_star: cone margin {margin:e} below required {required:e}")]
    ManufactureCone { margin: f64, required: f64 },

    #[error(
        "linear solve stagnated after {iterations} iterations (relative residual {relative:e})"
    )]
    Stagnated { iterations: usize, relative: f64 },

    #[error("continuation failed at t = {t} (step {dt:e} below minimum): {reason}")]
    ContinuationFailed {
        t: f64,
        dt: f64,
        reason: String,
        history: Vec<StepRecord>,
    },

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
