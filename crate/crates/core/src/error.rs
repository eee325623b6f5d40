//! Crate-wide error type.
//!
//! `Error` covers misuse: invalid parameters, malformed data or
//! configuration, and I/O problems. Statistical degeneracies that arise on
//! valid input (a test that cannot reach a decision, a fit that does not
//! converge) are *not* errors; they are reported as structured
//! [`methods::MethodFailure`](crate::methods::MethodFailure) records so a
//! simulation can log them and move on.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its domain (non-positive scale,
    /// probability outside the unit interval, and so on).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configuration object is self-inconsistent or incomplete.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Observed data violate the documented input contract.
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
