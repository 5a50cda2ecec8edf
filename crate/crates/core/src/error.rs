use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants fall into two families: user input problems (`Config`,
/// `Domain`, `Parameter`, `GridMismatch`, `Hypothesis`, `Missing`) and
/// numerical failures (`Factorization`, `NegativeEigenvalue`, `BlowUp`,
/// `Quadrature`). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("covariance factorization failed (n = {n}, H = {hurst}): {reason}")]
    Factorization {
        n: usize,
        hurst: f64,
        reason: String,
    },

    #[error(
        "circulant embedding eigenvalue {value:e} below tolerance (n = {n}, H = {hurst}); \
         fall back to the cholesky generator"
    )]
    NegativeEigenvalue { value: f64, n: usize, hurst: f64 },

    #[error("solution blew up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Factorization { .. }
                | Error::NegativeEigenvalue { .. }
                | Error::BlowUp { .. }
                | Error::Quadrature(_)
        )
    }

    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
