use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid matrix encoding: {0}")]
    InvalidMatrix(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("quadrature did not reach tolerance (estimate {estimate:.6e}, error {error:.3e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("target fidelity {target} is not bracketed (fidelity floor {floor})")]
    NotBracketed { target: f64, floor: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that stem from bad input data rather than a failed computation.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpectrum(_)
                | Error::InvalidDensityMatrix(_)
                | Error::InvalidMatrix(_)
                | Error::Domain(_)
                | Error::NotHermitian { .. }
                | Error::NotPsd { .. }
                | Error::NotBracketed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
