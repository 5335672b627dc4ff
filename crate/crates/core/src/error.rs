use thiserror::Error;

/// Errors raised by the generator, divergence, centroid and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("negative off-diagonal rate at ({0}, {1})")]
    NegativeRate(usize, usize),

    #[error("row {0} does not sum to zero")]
    RowSumViolation(usize),

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("empty input")]
    EmptyInput,

    #[error("dimension {0} too large for permutation enumeration (max 6)")]
    DimensionTooLarge(usize),

    #[error("generator family is empty")]
    EmptyFamily,

    #[error("degenerate family: every member with positive weight is the zero generator")]
    DegenerateFamily,

    #[error("invalid divergence: {0}")]
    InvalidDivergence(String),

    #[error("negative argument {0} passed to f")]
    NegativeArgument(f64),

    #[error("unsupported divergence for this operation: {0}")]
    UnsupportedSpec(String),

    #[error("divergence is infinite")]
    InfiniteDivergence,

    #[error("scalar minimizer did not reach tolerance within {0} iterations")]
    ToleranceNotReached(usize),

    #[error("non-finite iterate at iteration {0}")]
    NonFiniteIterate(usize),

    #[error("run not converged: gap {gap} exceeds {tol}")]
    NotConverged { gap: f64, tol: f64 },

    #[error("member {0} is not of the form P - I with zero-diagonal P")]
    ClassViolation(usize),

    #[error("too many members for grid oracle: {0} (max 3)")]
    TooManyMembers(usize),

    #[error("index {index} out of range for family of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
