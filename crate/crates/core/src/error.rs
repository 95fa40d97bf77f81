use thiserror::Error;

use crate::fd::FdReport;
use crate::spectral::SimReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectrum is not Hermitian (max asymmetry {asymmetry:e}, tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("invalid argument `{key}`: {message}")]
    InvalidArgument { key: &'static str, message: String },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no candidate constant set matches the quadrature oracle: {0}")]
    Adjudication(String),

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("solution blew up at t = {time}; reduce dt")]
    BlowUp {
        time: f64,
        /// Everything recorded up to the last finite state.
        partial: Box<SimReport>,
    },

    #[error("finite-difference solution blew up at t = {time}; reduce dt or cfl_fraction")]
    FdBlowUp {
        time: f64,
        /// Snapshots up to and including the last finite state.
        partial: Box<FdReport>,
    },
}

impl Error {
    pub(crate) fn invalid(key: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            key,
            message: message.into(),
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Quadrature { .. }
                | Error::Adjudication(_)
                | Error::BlowUp { .. }
                | Error::FdBlowUp { .. }
        )
    }
}
