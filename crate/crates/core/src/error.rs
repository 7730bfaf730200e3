use thiserror::Error;

use crate::scenario::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Domain,
    Numeric,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Parse => 2,
            ErrorCategory::Domain => 3,
            ErrorCategory::Numeric => 4,
            ErrorCategory::Io => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("outside chart domain: {0}")]
    Domain(String),

    #[error("trajectory left the chart domain at t = {time}: {reason}")]
    ChartExit { time: f64, reason: String },

    #[error("matrix {what} is singular (condition estimate {condition:e})")]
    Singular { what: &'static str, condition: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is not in the Lie algebra (re-expansion residual {residual:e})")]
    NotInAlgebra { residual: f64 },

    #[error("step size underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::UnknownQuantity(_) => ErrorCategory::Parse,
            Error::Domain(_) | Error::ChartExit { .. } | Error::InvalidArgument(_) => {
                ErrorCategory::Domain
            }
            Error::DimensionMismatch { .. }
            | Error::Singular { .. }
            | Error::NoConvergence { .. }
            | Error::NotInAlgebra { .. }
            | Error::StepUnderflow { .. }
            | Error::NonFinite(_) => ErrorCategory::Numeric,
            Error::Io(_) => ErrorCategory::Io,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
