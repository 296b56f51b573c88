use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tau parameters at position {position}: need 0 <= r < m < n, got (m,n,r) = ({m},{n},{r})")]
    InvalidTau {
        position: usize,
        m: String,
        n: String,
        r: String,
    },

    #[error("substitution image for symbol {symbol} is empty")]
    EmptyImage { symbol: u8 },

    #[error("alphabet mismatch: inner image uses symbol {symbol} but outer substitution has {outer_symbols} symbols")]
    AlphabetMismatch { symbol: u8, outer_symbols: usize },

    #[error("words are multiples of a common root word")]
    CommonRoot,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("word is not a factor of the subshift at this level")]
    NotAFactor,

    #[error("block parse is ambiguous beyond the trimmed edges")]
    AmbiguousEdges,

    #[error("index {index} out of range (max {max})")]
    OutOfRange { index: String, max: String },

    #[error("byte budget of {budget} exceeded (needed {needed})")]
    BudgetExceeded { budget: usize, needed: String },

    #[error("language sample too shallow: {0}")]
    InsufficientDepth(String),

    #[error("block stream is periodic; no further substitutive level exists")]
    Periodic,

    #[error("block stream is not of low-complexity type: {0}")]
    NotLowComplexity(String),

    #[error("matrix is not primitive")]
    NotPrimitive,

    #[error("p-adic residue precision insufficient: need exponent {needed} at prime {prime}, stored {stored}")]
    PrecisionInsufficient {
        prime: u64,
        needed: u32,
        stored: u32,
    },

    #[error("prefix too short: need at least {needed}, got {got}")]
    PrefixTooShort { needed: String, got: String },

    #[error("invalid realization target: {0}")]
    InvalidTarget(String),

    #[error("realization stage budget exhausted: {0}")]
    StageBudgetExhausted(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
