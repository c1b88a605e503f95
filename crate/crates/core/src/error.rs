use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter must be finite and nonzero, got {0}")]
    InvalidParameter(Complex64),

    #[error("point {z} lies within pole tolerance of the pole with index {pole_index}")]
    PoleProximity { z: Complex64, pole_index: i64 },

    #[error("the point at infinity is not a valid input here")]
    InfinityInput,

    #[error("value {z} is within branch tolerance of an omitted asymptotic value (depth {depth})")]
    AsymptoticValueInput { z: Complex64, depth: usize },

    #[error("iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("orbit collided with the pole of index {pole_index} at step {step}")]
    PoleCollision { step: usize, pole_index: i64 },

    #[error("inverse composition is not a contraction for branch {k}")]
    ContractionFailure { k: i64 },

    #[error("continuation step failed after sample {last_good} (lambda = {lambda})")]
    StepFailure { last_good: usize, lambda: Complex64 },

    #[error("parameter {0} has no detected attracting cycle")]
    NotHyperbolic(Complex64),

    #[error("ray continuation failed; last good parameter {lambda} at r = {r}")]
    ContinuationFailure { lambda: Complex64, r: f64 },

    #[error("asymptotic value collided with a prepole branch at depth {depth}")]
    AsymptoticValueCollision { depth: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
