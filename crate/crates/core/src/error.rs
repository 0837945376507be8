use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("generator count mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("malformed base group: {0}")]
    MalformedBase(String),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("determinant is not 1")]
    NotUnimodular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A computation outgrew its vertex budget.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "vertex budget of {budget} exceeded; completed radius {achieved_radius} ({vertices} vertices)"
)]
pub struct ResourceError {
    pub budget: usize,
    pub achieved_radius: usize,
    pub vertices: usize,
}
