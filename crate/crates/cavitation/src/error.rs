//! Crate-wide error types.

use thiserror::Error;

/// Errors produced by construction and evaluation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    /// Array arguments with inconsistent shapes.
    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// A matrix was singular to working precision.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// An iterative routine failed to converge.
    #[error("failed to converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Signal raised when a trial state loses orientation preservation
/// (`D <= 0` at a quadrature node). This is ordinary control flow for the
/// solver's line searches, not a fatal error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inadmissible {
    /// Radial quadrature index of the offending node.
    pub radial_index: usize,
    /// Angular quadrature index of the offending node.
    pub angular_index: usize,
    /// The non-positive determinant value found there.
    pub det: f64,
}

impl std::fmt::Display for Inadmissible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "inadmissible state: D = {:.3e} at node (m'={}, n'={})",
            self.det, self.radial_index, self.angular_index
        )
    }
}
