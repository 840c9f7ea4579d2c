use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Population leaked into the last Fock level beyond tolerance.
    #[error("truncation: {0}")]
    Truncation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Dimension outside what a routine supports (e.g. dense propagator on a large space).
    #[error("unsupported dimension {dim}: {reason}")]
    Dimension { dim: usize, reason: String },

    #[error("domain: {0}")]
    Domain(String),

    #[error("index {index} out of range 0..{len}")]
    Index { index: usize, len: usize },

    #[error("numerical instability: {0}")]
    Stability(String),

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("span too short: {0}")]
    SpanTooShort(String),

    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Truncation(_) => "truncation",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Dimension { .. } => "dimension",
            Error::Domain(_) => "domain",
            Error::Index { .. } => "index",
            Error::Stability(_) => "stability",
            Error::InsufficientSampling(_) => "insufficient_sampling",
            Error::SpanTooShort(_) => "span_too_short",
            Error::Overflow(_) => "overflow",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
