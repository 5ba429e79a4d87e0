use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input (bad vertex, bad spec string, bad config).
    #[error("invalid input: {0}")]
    Input(String),
    /// A parameter lies outside the range where the requested quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A randomized generator could not produce a sample within its retry budget.
    #[error("generation failed: {0}")]
    Generation(String),
    /// A size guard (brute-force cap, exhaustive-search cap) was exceeded.
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("cancelled")]
    Cancelled,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
