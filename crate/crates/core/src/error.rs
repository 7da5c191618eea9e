use thiserror::Error;

use crate::numerics::DerivativeEstimate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },

    #[error("finite-difference steps reached the noise floor before convergence (best: {best:?})")]
    StepUnderflow { best: DerivativeEstimate },

    #[error("law has zero variance and cannot be standardized")]
    ZeroVariance,

    #[error("covariance lost positive semidefiniteness at step {step}: min eigenvalue {min_eigenvalue:e}")]
    IllConditioned { step: usize, min_eigenvalue: f64 },

    #[error("divergence slope error {error:e} exceeds 10% of the correction term {correction:e}")]
    DerivativeNoise { correction: f64, error: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::ZeroVariance)
    }
}
