use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("pieces overlap on a set of positive measure: {0}")]
    OverlappingPieces(String),
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("|{0}| is irrational; this operation needs rational moduli")]
    IrrationalModulus(String),
    #[error("dilation factor must be positive, got {0}")]
    NonpositiveDilation(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unsupported norm selector `{0}`")]
    BadNormSelector(String),
    #[error("candidate class is empty")]
    EmptyCandidateClass,
    #[error("set is not contained in the open union: {0}")]
    NotCovered(String),
    #[error("boundary margin is zero: {0}")]
    ZeroMargin(String),
    #[error("norm is not absolutely continuous: {0}")]
    NotAbsolutelyContinuous(String),
    #[error("search horizon {0} exhausted: {1}")]
    HorizonExhausted(usize, String),
    #[error("growth precondition failed: {0}")]
    GrowthPrecondition(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
