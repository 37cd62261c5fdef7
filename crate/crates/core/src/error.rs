use thiserror::Error;

/// Errors raised by the codecs, channel simulator and calculators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Invalid parameters or mismatched inputs.
    #[error("parameter error: {0}")]
    Param(String),
    /// A configuration that cannot be realized (field too small, no room for redundancy, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input that cannot have come from the encoder.
    #[error("corrupted input: {0}")]
    Corruption(String),
    /// The decoder could not recover the message.
    #[error("decode failure: {0}")]
    Decode(String),
    /// An enumeration or sampling budget was exhausted.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Param(format!($($arg)*)) };
}
pub(crate) use param_err;
