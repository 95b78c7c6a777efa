use thiserror::Error;

/// Errors raised by targets, kernels, theory routines and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} is not finite ({value})")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("log-density is not differentiable at coordinate {index} (x = {value})")]
    NonDifferentiable { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("adaptive quadrature did not converge (estimate {estimate}, error {error_estimate} after {intervals} intervals)")]
    QuadratureNonConvergence {
        estimate: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("scaling schedule violates the boundedness condition: {0}")]
    UnboundedSchedule(String),

    #[error("initial state has zero target density")]
    ZeroDensityStart,

    #[error("drift is not finite at step {step} (state {value})")]
    NonFiniteDrift { step: usize, value: f64 },

    #[error("trace too short: need {needed} iterations, have {available}")]
    TraceTooShort { needed: usize, available: usize },

    #[error("coordinate {0} was not recorded in the trace")]
    CoordinateNotRecorded(usize),

    #[error("empty window: no samples left after burn-in")]
    EmptyWindow,

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("partial autocorrelation recursion broke down at lag {lag} (value {value})")]
    RecursionBreakdown { lag: usize, value: f64 },

    #[error("ensemble mismatch: {0}")]
    EnsembleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
