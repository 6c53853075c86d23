use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient dimensions differ: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("frame is singular")]
    SingularFrame,
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("block {0} is rank-deficient")]
    BlockDegenerate(usize),
    #[error("no eigenvalue gap above tolerance")]
    NoGap,
    #[error("degenerate Gram matrix for item {0}")]
    DegenerateGram(usize),
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("frame of item {item} at point {point} is not orthonormal")]
    FrameNotOrthonormal { point: usize, item: usize },
    #[error("soundness violation: {0}")]
    SoundnessViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
