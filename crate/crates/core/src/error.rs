use thiserror::Error;

use crate::model::BasisOrder;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative quantum number {name} = {value}")]
    NegativeQuantumNumber { name: &'static str, value: i64 },

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: BasisOrder, found: BasisOrder },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("poisson tail did not fall below {tail_tol:e} within {cap} terms")]
    TailTruncation { tail_tol: f64, cap: usize },

    #[error("poisson k-sum disagrees with the closed form by {deviation:e}")]
    PoissonSelfCheck { deviation: f64 },

    #[error("positivity violated: minimum eigenvalue {min_eigenvalue:e}")]
    Positivity { min_eigenvalue: f64 },
}

impl Error {
    /// Failures of the numerics, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NonFinite(_)
                | Error::TailTruncation { .. }
                | Error::PoissonSelfCheck { .. }
                | Error::Positivity { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
