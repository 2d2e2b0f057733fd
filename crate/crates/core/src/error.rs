use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region is empty")]
    EmptyRegion,

    #[error("region too small: interior core at depth {depth} is empty")]
    RegionTooSmall { depth: usize },

    #[error("pattern side M = {side} too small for overall range R = {range} (need M > 2R)")]
    SideTooSmall { side: usize, range: usize },

    #[error("pattern {pattern} has positive reference frequency but no known occurrence")]
    NoOccurrence { pattern: String },

    #[error(
        "function is not invariant: pattern {pattern} evaluates differently at two occurrences"
    )]
    NotInvariant { pattern: String },

    #[error("operator is not hermitian: {0}")]
    NonHermitian(String),

    #[error("eigensolver failed: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
