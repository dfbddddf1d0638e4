use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Evaluation exactly at a point where the quantity diverges.
    #[error("{op} is singular at {at}")]
    Singular { op: &'static str, at: f64 },

    /// Adaptive quadrature ran out of its subdivision budget.
    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (partial value {value:e}, error estimate {error_estimate:e})"
    )]
    Quadrature { value: f64, error_estimate: f64, evaluations: usize },

    /// The integrand produced a NaN or infinite value.
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },

    /// Not enough data to form an estimate.
    #[error("degenerate ensemble: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(op: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Domain { op, reason: reason.into() })
}
