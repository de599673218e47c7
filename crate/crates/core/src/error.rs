use thiserror::Error;

/// Errors raised by the numerics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum XpError {
    #[error("exponent p must satisfy p > 2, got {0}")]
    InvalidExponent(f64),

    #[error("weight w_{index} must be positive and finite, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("truncation dimension {dim} outside 1..={cap}")]
    DimensionOutOfRange { dim: usize, cap: usize },

    #[error("index {index} outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("non-finite coefficient at index {0}")]
    NonFiniteCoefficient(usize),

    #[error("operands live in different spaces")]
    SpaceMismatch,

    #[error("{0} is undefined for the zero vector")]
    ZeroVector(&'static str),

    #[error("support set must be nonempty")]
    EmptySupport,

    #[error("vector is not supported on the given set (index {0} lies outside)")]
    NotSupported(usize),

    #[error("functional undefined: block has no 2-mass on its designated set")]
    FunctionalUndefined,

    #[error("block condition ({condition}) fails: {lhs} < {rhs}")]
    BlockCondition {
        condition: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("blocks {0} and {1} overlap in {2}")]
    Overlap(usize, usize, &'static str),

    #[error("block {index} is not normalized (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },

    #[error("Gram matrix is singular: basis is linearly dependent")]
    SingularGram,

    #[error("Gram matrix condition number {0:e} exceeds 1e12")]
    IllConditioned(f64),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = XpError> = std::result::Result<T, E>;
