use thiserror::Error;

/// Everything that can go wrong in the models, integrators and verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vacuum field must be negative, got W = {0}")]
    NonNegativeField(f64),
    #[error("velocity must satisfy |u| < 1, got |u| = {0}")]
    SuperluminalInit(f64),
    #[error("subluminal invariant violated: square-root argument {0} is not positive")]
    SubluminalViolation(f64),
    #[error("test charge must be nonzero")]
    ZeroTestCharge,
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("implicit iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("trajectories have no overlapping lab-time range")]
    NoOverlap,
    #[error("time step {dt} exceeds the stability bound h/sqrt(3) = {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("residuals at level {index} need neighbours; {available} levels stored")]
    InsufficientHistory { index: usize, available: usize },
    #[error("integration ball leaves the grid at sample {0}")]
    BallExitsGrid(usize),
    #[error("mass profile must be positive, got m = {value} at index {index}")]
    NonPositiveMass { index: usize, value: f64 },
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("mode with hbar*k = {hk} is not below |W| = {w}")]
    SuperluminalMode { hk: f64, w: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
