//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),

    #[error("unsupported order {order}: {reason}")]
    UnsupportedOrder { order: u64, reason: String },

    #[error("field of order {0} has characteristic 2; square classes are undefined")]
    EvenCharacteristic(u32),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("Hadamard order {0} is too small to yield a strength-2 orthogonal array")]
    OrderTooSmall(usize),

    #[error("prime power {s} is not congruent to 3 mod 4")]
    BadCongruence { s: u32 },

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("plan has no block structure")]
    NoBlocks,

    #[error("factor sets overlap: {0}")]
    OverlappingSets(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol mismatch: {0}")]
    SymbolMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("eigen decomposition residual {residual:e} exceeds tolerance {bound:e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("level {level} out of range for factor `{factor}` with {levels} levels (run {run})")]
    LevelOutOfRange {
        run: usize,
        factor: String,
        level: u32,
        levels: u32,
    },

    #[error("block sizes sum to {sum} but the plan has {runs} runs")]
    BlockSizeMismatch { sum: usize, runs: usize },

    #[error("invalid seed array: {0}")]
    InvalidSeedArray(String),

    #[error("algebraic identity violated: {0}")]
    IdentityViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
