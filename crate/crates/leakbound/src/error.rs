//! Error taxonomy shared by the whole crate.
//!
//! Three kinds map onto the CLI exit codes: validation and domain errors are
//! caller mistakes (exit 3), capability errors are requests that exceed a
//! hard resource guard (exit 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid input: masses that do not form a pmf, rows that
    /// are not stochastic, mismatched dimensions.
    #[error("validation: {0}")]
    Validation(String),

    /// Parameters outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// The request is well-formed but larger than the exact algorithms are
    /// willing to attempt.
    #[error("capability: {0}")]
    Capability(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
