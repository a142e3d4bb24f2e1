use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    HermiticityViolation { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),

    #[error("sampled Wishart matrix has zero trace")]
    DegenerateSample,

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("purity {purity} outside [1/n, 1] for n = {n}")]
    InvalidPurity { purity: f64, n: usize },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid experiment spec: {0}")]
    SpecError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
