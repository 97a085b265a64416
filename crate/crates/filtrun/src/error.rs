//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("vector must be nonempty")]
    EmptyVector,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("truncation level {k} too large for length {len}: need 2k < len")]
    TruncationTooLarge { k: usize, len: usize },

    #[error("coordinate set must be nonempty")]
    EmptyCoordSet,

    #[error("coordinate {index} out of range for dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("coordinate set not strictly increasing at position {position}")]
    CoordsNotIncreasing { position: usize },

    #[error("covariance matrix not symmetric: |S[{i},{j}] - S[{j},{i}]| = {delta:e}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },

    #[error("covariance not positive definite: eigenvalue {value:e} at or below floor {floor:e}")]
    NotPositiveDefinite { value: f64, floor: f64 },

    #[error("covariance dimension {dim} does not match mean dimension {mean_dim}")]
    CovarianceDimension { dim: usize, mean_dim: usize },

    #[error("zero mean vector: whitened mean is undefined, cannot normalize")]
    ZeroMean,

    #[error("degenerate filtration: whitened mean vanishes on the surviving set")]
    DegenerateFiltration,

    #[error("operation requires a diagonal covariance")]
    DiagonalRequired,

    #[error("whitened mean is not sorted by decreasing magnitude at index {index}")]
    NotSortedByMagnitude { index: usize },

    #[error("{what} = {value} out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("psi samples not nondecreasing at index {index}")]
    NonMonotonePsi { index: usize },

    #[error("invalid problem file ({context}): {message}")]
    ProblemFile { context: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
