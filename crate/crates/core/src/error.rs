use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid polygon address: {0}")]
    InvalidAddress(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("surface is empty or not connected")]
    NotAdmissible,
    #[error("enlargement target does not contain the source support")]
    NotContaining,
    #[error("map is not rigid outside the given surface")]
    NotRigidOutside,
    #[error("polygon {0} lies inside the support")]
    InsideSupport(String),
    #[error("invalid branch: {0}")]
    InvalidBranch(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("vertices belong to different families or structures")]
    FamilyMismatch,
    #[error("resource guard tripped: {0}")]
    LimitTooLarge(String),
    #[error("vertex is not dominated by the target")]
    NotDominated,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("corner is not part of the ball")]
    CornerNotInBall,
    #[error("vertex {0} is too close to the ball boundary")]
    BoundaryVertex(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
