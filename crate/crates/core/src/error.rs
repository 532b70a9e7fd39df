use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("basis file error at line {line}: {message}")]
    BasisFile { line: usize, message: String },

    #[error("overlap matrix is not positive definite (smallest eigenvalue {smallest_eigenvalue:.3e})")]
    Conditioning { smallest_eigenvalue: f64 },

    #[error("SCF did not converge after {iterations} iterations (last energy change {last_delta:.3e})")]
    ScfNotConverged { iterations: usize, last_delta: f64 },

    #[error("orbital energy denominator {gap:.3e} is below the singularity threshold")]
    Singularity { gap: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sector dimension {dimension} exceeds the dense cap of {cap}")]
    SizeLimit { dimension: usize, cap: usize },

    #[error("state vector has zero norm")]
    ZeroState,

    #[error("exponential series did not converge within {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("line search failed: {0}")]
    LineSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
