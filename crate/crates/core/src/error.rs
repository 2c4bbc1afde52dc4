use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical degeneracy in {op}: {detail}")]
    NumericalDegeneracy { op: &'static str, detail: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("fit did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e}, residual norm {residual_norm:.3e})")]
    FitFailure {
        iterations: usize,
        gradient_norm: f64,
        residual_norm: f64,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("truncation mass {mass:.3e} exceeds gate {gate:.3e}")]
    Truncation { mass: f64, gate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
