use thiserror::Error;

/// Errors produced by the scheme, its codecs and its file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} outside the supported range [2^20, 2^41)")]
    ModulusOutOfRange(u64),
    #[error("operands use different moduli ({left} vs {right})")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("value {value} is not a canonical residue mod {modulus}")]
    NonCanonical { value: u64, modulus: u64 },
    #[error("centered value {value} out of range for modulus {modulus}")]
    CenteredOutOfRange { value: i64, modulus: u64 },

    #[error("invalid gaussian parameters: {0}")]
    InvalidGaussian(String),
    #[error("noise bound {bound} must be below q/4 = {limit}")]
    NoiseBudget { bound: i64, limit: u64 },
    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported security parameter {0} (only 128 has built-in defaults)")]
    UnsupportedLambda(u32),
    #[error("message matrix has no columns")]
    EmptyMessage,
    #[error("recipient index {index} out of range 1..={m}")]
    RecipientOutOfRange { index: usize, m: usize },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated input: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingData(usize),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("image {rows}x{cols} cannot hold a window of width {width}")]
    WindowTooWide { rows: usize, cols: usize, width: usize },
    #[error("modulus {0} too small for a byte window")]
    ModulusTooSmall(u64),
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("{given} streams exceed the {m} available recipient rows")]
    TooManyStreams { given: usize, m: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("leak size k={k} out of range for m={m}")]
    LeakOutOfRange { k: usize, m: usize },
    #[error("IND-CPA game rule violated: {0}")]
    GameRule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
