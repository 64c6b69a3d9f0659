use thiserror::Error;

/// Errors produced anywhere in the computation pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("element is not a member of the group: {0}")]
    NotMember(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("invalid lift: {0}")]
    InvalidLift(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-integer result: {0}")]
    NonInteger(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("degenerate fixed point set: {0}")]
    DegenerateFixedSet(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
