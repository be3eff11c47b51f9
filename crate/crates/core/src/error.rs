use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("norm drift {drift:.3e} exceeds tolerance {tolerance:.3e}; increase steps_per_period")]
    StepTooLarge { drift: f64, tolerance: f64 },

    #[error("unitarity defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    UnitarityLoss { defect: f64, tolerance: f64 },

    #[error("eigen-decomposition failed: {0}")]
    DiagonalizationFailure(String),

    #[error("pendulum chart singular: 1 - p^2 = {gap:.3e} below guard {guard:.3e}")]
    PoleProximity { gap: f64, guard: f64 },

    #[error("integrator failed at tau = {tau}: {reason}")]
    Integration { tau: f64, reason: String },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton Jacobian is singular (det(J - 1) = {det:.3e})")]
    JacobianSingular { det: f64 },

    #[error("orbit is not a regular invariant curve: {0}")]
    NotRegular(String),

    #[error("no invariant curve carries action {target:.6e}: {reason}")]
    NoCurve { target: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
