use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported weight {weight}: {reason}")]
    UnsupportedWeight { weight: u32, reason: &'static str },

    #[error("series length must be at least 1")]
    EmptySeries,

    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("exponent must be at least 1")]
    ZeroExponent,

    #[error("coefficient at q^{index} is not divisible by {divisor}; series arithmetic is inconsistent")]
    NotDivisible { index: usize, divisor: u32 },

    #[error("table holds n <= {n_max} but {requested} was requested")]
    TableTooShort { requested: String, n_max: u64 },

    #[error("precision of {bits} bits is below the 64-bit minimum")]
    PrecisionTooLow { bits: u32 },

    #[error("unsupported (k, l) = ({k}, {l}); expected one of (2,1), (3,2), (4,2)")]
    UnsupportedShape { k: u32, l: u32 },

    #[error("unsupported moment order {k}; expected {allowed}")]
    UnsupportedOrder { k: u32, allowed: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{check} failed at {witness}: {detail}")]
    Validation {
        check: &'static str,
        witness: String,
        detail: String,
    },

    #[error("coefficient cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a mathematical validator (as opposed to bad input).
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::NotDivisible { .. })
    }
}
