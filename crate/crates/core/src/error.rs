//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix handed to `sqrt_psd` has an eigenvalue below the rounding
    /// tolerance `-1e-10 * ||m||`.
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} < bound {bound:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, bound: f64 },

    #[error("ill-conditioned block {block}: condition number {cond:e}")]
    IllConditioned { block: &'static str, cond: f64 },

    #[error("secular function evaluated at a pole: lambda = {lambda}")]
    PoleEvaluation { lambda: f64 },

    /// Requested the isolated root above the poles of a free mode (g = 0).
    #[error("no plasmon root exists for coupling g = 0")]
    NoPlasmon,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
