use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("Frobenius series did not converge at x0 = {x0:e} (tail {tail:e})")]
    SeriesNonConvergence { x0: f64, tail: f64 },
    #[error("integrator step failure at x = {x:e}: {reason}")]
    StepFailure { x: f64, reason: String },
    #[error("Wronskian normalization failed: |W - 1| = {0:e}")]
    Normalization(f64),
    #[error("grid mismatch between solution jets")]
    GridMismatch,
    #[error("point {0} is not on the grid")]
    OffGrid(f64),
    #[error("eigenvalue bracketing failed on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("z = {z} lies within the exclusion radius {radius:e} of the pole {pole}")]
    NearPole { z: String, pole: f64, radius: f64 },
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("tail fit unavailable: {0}")]
    TailFit(String),
    #[error("interlacing violation: {0}")]
    Interlacing(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
