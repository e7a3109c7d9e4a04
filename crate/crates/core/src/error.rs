use thiserror::Error;

/// Errors raised by the simulator. Every message names the module and the
/// contract that was violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin-core: invalid spin {0}: 2S must be a non-negative integer")]
    InvalidSpin(f64),

    #[error("spin-core: Hilbert dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("spin-core: invalid system specification: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("spin-core: site index {index} out of range for {sites} sites")]
    SiteIndex { index: usize, sites: usize },

    #[error("{module}: dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        module: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{module}: contract violation: {message}")]
    Contract {
        module: &'static str,
        message: String,
    },

    #[error("qec: capacity error: {0}")]
    Capacity(String),

    #[error("qec: protocol synthesis failed: {0}")]
    ProtocolSynthesis(String),

    #[error("cavity-bus: dispersive regime violated: {0}")]
    Resonance(String),

    #[error("cavity-bus: swap synthesis failed: {0}")]
    SwapSynthesis(String),

    #[error("dqs-compiler: gate synthesis failed: {0}")]
    GateSynthesis(String),

    #[error("dqs-compiler: capacity error: {0}")]
    EncodingCapacity(String),

    #[error("dqs-compiler: unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn contract(module: &'static str, message: impl Into<String>) -> Self {
        Error::Contract {
            module,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
