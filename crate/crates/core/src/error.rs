use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries are not finite")]
    NonFinite,
    #[error("eigenvalue solver did not converge")]
    ConvergenceFailure,
    #[error("exterior power degree {k} is out of range for dimension {dim}")]
    BadRank { k: usize, dim: usize },
    #[error("matrix is numerically singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("{count} words exceed the enumeration budget of {budget}")]
    Overflow { count: u128, budget: u64 },
    #[error("exponent s = {s} is outside the admissible range {range}")]
    OutOfRangeS { s: f64, range: &'static str },
    #[error("word is not a spectral witness: eigenvalue ratios agree")]
    NotAWitness,
    #[error("tuple is not contracting: ‖A_{index}‖ = {norm}")]
    NotContracting { index: usize, norm: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
