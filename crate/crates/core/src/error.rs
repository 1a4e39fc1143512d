use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a precondition (domain error, bad config, …).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no blow-up: {0}")]
    NoBlowup(String),

    #[error("step size underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("CFL violation: dt = {dt} exceeds cfl * dr = {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("solution support reached the outer boundary r_max = {r_max} at t = {t}")]
    BoundaryContact { t: f64, r_max: f64 },

    #[error("non-finite value detected; last stable time t = {last_stable_time}")]
    NaNDetected { last_stable_time: f64 },

    #[error("blow-up estimates disagree across resolutions by {spread:.1}% (> 10%)")]
    NonMonotoneRefinement { spread: f64 },

    #[error("overflow evaluating {0}")]
    Overflow(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical computation, as opposed to invalid
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoBlowup(_)
                | Error::StepUnderflow { .. }
                | Error::NaNDetected { .. }
                | Error::NonMonotoneRefinement { .. }
                | Error::Overflow(_)
        )
    }
}
