use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rank {0}: need at least 1")]
    InvalidRank(usize),
    #[error("width {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("cap exceeded: more than {cap} states")]
    CapExceeded { cap: usize },
    #[error("index {0} out of range")]
    IndexOutOfRange(String),
    #[error("unsupported architecture: {0}")]
    UnsupportedArchitecture(String),
    #[error("invalid HV-tree: {0}")]
    InvalidTree(String),
    #[error("invalid tiling: {0}")]
    InvalidTiling(String),
    #[error("segment is not flippable")]
    RejectedFlip,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("chain is not reversible: {0}")]
    NonReversible(String),
    #[error("eigensolver did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },
    #[error("depth {0} is odd")]
    OddDepth(usize),
    #[error("odd qubit count {0}")]
    OddQubits(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
