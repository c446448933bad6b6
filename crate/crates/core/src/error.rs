use thiserror::Error;

/// Errors raised across the estimation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes of the operands do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A matrix that must be Hermitian is not (value is the relative asymmetry).
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A Vandermonde decomposition does not exist or is not unique.
    #[error("decomposition infeasible: {0}")]
    DecompositionInfeasible(String),
    /// The pairing step cannot be carried out on the given estimates.
    #[error("pairing ill-posed: {0}")]
    PairingIllPosed(String),
    /// A dense factorization failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The problem exceeds a configured size guard.
    #[error("problem too large: {0}")]
    TooLarge(String),
    /// The conic solver did not reach an optimal point.
    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
