use alloc::string::String;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("not a density matrix: {0}")]
    NotState(String),
    #[error("subsystem {index} out of range for {count} subsystems")]
    Subsystem { index: usize, count: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("operators share a common eigenvector: {0}")]
    CommonEigenvector(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular circulant after {retries} embedding retries")]
    SingularExhausted { retries: usize },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;
