use thiserror::Error;

/// Errors raised by the spectral model and its derived constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The circulant covariance has an eigenvalue below the admissible floor.
    #[error(
        "covariance is not positive semidefinite: eigenvalue {eigenvalue:e} below floor {floor:e}"
    )]
    NotPositiveDefinite { eigenvalue: f64, floor: f64 },

    /// `K` has a (relatively) vanishing eigenvalue, so the modular matrix does not exist.
    #[error("covariance is not invertible: smallest eigenvalue {min:e} <= {floor:e} (vacuum components present)")]
    NotInvertible { min: f64, floor: f64 },

    #[error("thermal support is empty")]
    EmptySupport,

    #[error("spectrum is not of vacuum type: {0} grid points carry both kappa and kappa_rev")]
    NotVacuum(usize),

    /// Recovery of the canonical pair needs `sigma != sigma_rev` on every retained point.
    #[error("canonical pair cannot be recovered: sigma == sigma_rev at nu = {nu}")]
    DegenerateRecovery { nu: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
