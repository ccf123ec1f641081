//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Error`]; the CLI maps the variants
//! onto distinct process exit codes (invalid arguments, inadmissible
//! parameters, failed verification, numerical abort).

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// Input parameters violate a documented precondition or invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The requested solution/operation exists but is not admissible for
    /// these parameters (e.g. a (c, θ) query outside the kinematic region).
    #[error("inadmissible: {0}")]
    Inadmissible(String),

    /// A verification check ran to completion and failed.
    #[error("check failed: {0}")]
    CheckFailed(String),

    /// A numerical computation aborted (NaN/overflow, lost peak, ...).
    #[error("numeric abort: {0}")]
    NumericAbort(String),

    /// A jet point was asked for a derivative it does not carry.
    /// Missing entries fail loudly rather than defaulting to zero.
    #[error("jet point missing derivative (dt={0}, dx={1}, dy={2})")]
    MissingJetEntry(u8, u8, u8),

    /// Underlying I/O failure (file output, config parsing).
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
