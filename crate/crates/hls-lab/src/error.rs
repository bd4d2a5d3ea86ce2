//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction and evaluation routines.
///
/// Numerical assertions that belong to the verification suites are not
/// errors; those are reported through the report types and exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid or cutoff configuration is inconsistent or under-resolved.
    #[error("configuration error: {0}")]
    Config(String),

    /// An evaluation point collides with an integrable kernel singularity.
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// A conformal lift or power produced non-finite values.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Report emission failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
