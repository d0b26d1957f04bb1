use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix data: expected {expected} entries, got {got}")]
    InvalidData { expected: usize, got: usize },

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// A pivot fell below the relative tolerance: the matrix is singular
    /// to working accuracy.
    #[error("matrix is singular (pivot {pivot:e} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("exact enumeration over dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("vector norm is {norm}, expected 1")]
    NotUnitVector { norm: f64 },

    #[error("componentwise error undefined: component {index} is zero")]
    ZeroComponent { index: usize },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("matrix is not lower triangular: nonzero entry at ({row}, {col})")]
    NotLowerTriangular { row: usize, col: usize },

    #[error("rounding hypothesis violated: (n + 2) * eps = {value} must be < 1 (n = {n})")]
    HypothesisViolated { n: usize, value: f64 },

    #[error("solution component {row} overflows the floating-point range; the rounding model does not apply")]
    RangeExceeded { row: usize },

    #[error("perturbation of size {delta:e} makes the matrix singular")]
    DeltaTooLarge { delta: f64 },

    #[error("statistic {statistic} is not defined for ensemble {ensemble}")]
    IncompatibleStatistic {
        statistic: &'static str,
        ensemble: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
