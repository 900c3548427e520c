use thiserror::Error;

use crate::linalg::{LinalgError, SolveReport};

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: shapes, ranges, or an invalid configuration.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("Fock space dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// The failing solve certificate, if the error came from a linear solve.
    pub fn solve_report(&self) -> Option<&SolveReport> {
        match self {
            Error::Linalg(e) => e.report(),
            _ => None,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Linalg(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
