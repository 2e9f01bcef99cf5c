use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    /// Dense simulation asked for more qubits than the configured cap.
    #[error("capacity exceeded: {requested} qubits requested, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    /// No block size up to `cap` reached the requested probability.
    #[error("block size search failed: no k <= {cap} reached the target probability")]
    SearchFailure { cap: usize },

    /// A pipeline stage could not complete for this sample.
    #[error("extraction failed at stage `{stage}`: {detail}")]
    Extraction { stage: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
