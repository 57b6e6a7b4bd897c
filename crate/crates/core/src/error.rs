//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular at pivot {index}")]
    Singular { index: usize },
    #[error("solution contains non-finite values")]
    NonFinite,
    #[error("iteration did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("vector length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("entry count {len} is not dim^order for order {order}, dim {dim}")]
    InvalidShape { len: usize, order: usize, dim: usize },
    #[error("tensor is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("invalid parameters: order {order}, dim {dim}")]
    InvalidParameters { order: usize, dim: usize },
    #[error("cannot leave {free} free indices on an order-{order} tensor")]
    TooManyFree { free: usize, order: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("left inverse is singular (condition estimate {condition:e})")]
    SingularLeftInverse { condition: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("Rayleigh root solve did not converge (last residual {residual:e})")]
    RayleighNoConvergence { residual: f64 },
    #[error("second derivatives are not available for this problem")]
    MissingSecondDerivatives,
    #[error("biorthogonality breakdown: |v*u| = {value:e}")]
    Biorthogonality { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetractionError {
    #[error("degenerate step: |x + eta| = {norm:e}")]
    DegenerateStep { norm: f64 },
    #[error("x + eta is rank deficient")]
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("solver needs second derivatives that the problem does not provide")]
    MissingCapability,
    #[error("starting point has length {actual}, expected {expected}")]
    BadStart { expected: usize, actual: usize },
    #[error("insufficient residual history: {available} usable values, need {required}")]
    InsufficientHistory { available: usize, required: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("invalid instance parameters: {0}")]
    Invalid(&'static str),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("eigenpair table is full ({capacity} records)")]
    TableFull { capacity: usize },
}
