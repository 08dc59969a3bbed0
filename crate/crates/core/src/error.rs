use thiserror::Error;

use crate::scenario::ValidationReport;

/// Failures raised while evaluating a coefficient profile.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("pole-scaled profile evaluated at t = {t} which is not before the pole T = {pole}")]
    BeyondPole { t: f64, pole: f64 },
    #[error("pole-scaled profile has non-positive pole time T = {0}")]
    InvalidPole(f64),
    #[error("piecewise-linear profile has no knots")]
    EmptyKnots,
    #[error("piecewise-linear knots are not strictly increasing at index {0}")]
    UnorderedKnots(usize),
    #[error("profile evaluated to a non-finite value at t = {0}")]
    NonFinite(f64),
}

/// Failures of the integrator itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("empty integration span: t_end = {t_end} is not after t_start = {t_start}")]
    EmptySpan { t_start: f64, t_end: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },
    #[error("guarded quantity dropped below f_stop at t = {t}")]
    SingularityGuard { t: f64 },
    #[error("coefficient evaluation failed: {0}")]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario is not runnable:\n{0}")]
    InvalidScenario(ValidationReport),
    #[error("model does not apply: {0}")]
    WrongModel(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("comparison ordering violated: Q1 < Q2 at t = {t}")]
    OrderingViolated { t: f64 },
    #[error("variation field does not vanish at the interval endpoints (|v| = {0:e})")]
    EndpointNonzero(f64),
    #[error("conjugate times are not strictly increasing at index {0}")]
    NonMonotoneTimes(usize),
    #[error("f is not positive at t = {0}")]
    NonpositiveF(f64),
    #[error("initial vorticity vanishes at this fixed point")]
    ZeroVorticity,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
