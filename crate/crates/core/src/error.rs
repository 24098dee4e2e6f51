//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::profile::WaveProfile;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter is outside the range an operation is defined for.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An input value (state, iterate, boundary datum) is outside the domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent grid, step size or preset selection.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The tracked level is not crossed by the field.
    #[error("tracking error: level {level} is not bracketed by the field")]
    NotBracketed { level: f64 },

    /// The field crosses the tracked level more than once.
    #[error("tracking error: level {level} crossed {} times at {crossings:?}", crossings.len())]
    Ambiguous { level: f64, crossings: Vec<f64> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Non-finite values appeared while time stepping.
    #[error("divergence at t = {t}: {what}")]
    Divergence { t: f64, what: String },

    /// An iterative method stopped without meeting its tolerance.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Newton stagnation on the wave-profile problem; carries the last iterate.
    #[error("profile solve did not converge after {iterations} iterations (residual {residual:e})")]
    ProfileNonConvergence {
        iterations: usize,
        residual: f64,
        last: Box<WaveProfile>,
    },

    /// A computed object failed one of its certified properties.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Parameter constraints of a comparison-function construction are violated.
    #[error("infeasible parameters: {}", .0.join("; "))]
    Infeasible(Vec<String>),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by a failed check.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::Domain(_)
                | Error::Configuration(_)
                | Error::Infeasible(_)
                | Error::Parse { .. }
        )
    }
}
