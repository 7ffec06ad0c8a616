use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An integer quantity does not fit the representable range.
    #[error("range error: {0}")]
    Range(String),
    /// A computation would exceed a configured resource cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// An iterative numerical method failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A Monte Carlo trial failed; the seed identifies the section.
    #[error("trial {trial_index} (seed {trial_seed:#018x}) failed: {source}")]
    Trial {
        trial_index: u64,
        trial_seed: u64,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
