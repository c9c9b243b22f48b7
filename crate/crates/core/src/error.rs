use thiserror::Error;

/// Errors raised by the exact and numeric kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero up to precision")]
    ZeroUpToPrecision,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("singular up to precision")]
    Singular,
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("depth overflow: slot depth {depth} exceeds ambient depth {max}")]
    DepthOverflow { depth: u32, max: u32 },
    #[error("window exhausted: {0}")]
    WindowExhausted(String),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("not proportional: {0}")]
    NotProportional(String),
    #[error("dimension too large: {dim} > {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("rhs near zero")]
    RhsNearZero,
    #[error("not an eigenfunction: {0}")]
    NotEigen(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
