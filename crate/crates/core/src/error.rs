use thiserror::Error;

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A signed sum cancelled to below the working precision.
    #[error("total cancellation in {op}: result below representable precision")]
    Cancellation { op: &'static str },

    /// A transform value outside (0, 1) was fed to the queueing recursion.
    #[error("invalid transform value {value} at theta = {theta}")]
    InvalidTransform { theta: f64, value: f64 },

    #[error(
        "fixed point did not converge after {iterations} iterations \
         (best lambda = {best_lambda}, relative residual = {residual})"
    )]
    NonConvergence {
        iterations: usize,
        best_lambda: f64,
        best_capacity: u64,
        residual: f64,
    },

    #[error("invalid configuration at `{path}`: {reason}")]
    Config { path: String, reason: String },
}

impl ModelError {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Domain {
            op,
            reason: reason.into(),
        }
    }
}
