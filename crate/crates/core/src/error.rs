use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {evaluations} evaluations (error estimate {error_estimate:e})")]
    NonConvergence {
        evaluations: usize,
        error_estimate: f64,
    },

    #[error("fading model has no density (point mass)")]
    NoDensity,

    #[error("integral diverges: {0}")]
    IntegralDiverges(String),

    #[error("variance upper bound is infinite")]
    UnboundedVariance,

    #[error("closed-form and quadrature routes disagree: {first} vs {second}")]
    RouteMismatch { first: f64, second: f64 },

    #[error("simulation window too large: {0}")]
    WindowTooSmall(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("insufficient data: {count} samples, need at least {needed}")]
    InsufficientData { count: usize, needed: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
