//! Library-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported distribution kind: {0}")]
    UnsupportedDistribution(String),

    #[error("index {index} out of range for realization of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("energy {e} outside the open band (-2, 2) after guard {guard}")]
    OutsideBand { e: f64, guard: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("initial angles must satisfy 0 < |theta1 - theta2| <= pi/2, got separation {0}")]
    BadAngleSeparation(f64),

    #[error("realization of length {len} too short for box size {needed}")]
    LengthMismatch { len: usize, needed: usize },

    #[error("eigensolver failed to converge at index {index}")]
    ConvergenceFailure { index: usize },

    #[error("fit window holds {got} samples, need at least {need}")]
    WindowTooSmall { got: usize, need: usize },

    #[error("energy {e} collides with a box eigenvalue (distance < {tol})")]
    EigenvalueCollision { e: f64, tol: f64 },

    #[error("spectral projection onto the window is empty at the initial site")]
    EmptyProjection,

    #[error("moment curve saturated over the requested fit range")]
    SaturatedRange,

    #[error("chain length {0} too small, need at least 1000")]
    ChainTooShort(usize),
}
