//! Error types shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcError {
    /// Matrix/vector dimensions do not match the operation's contract.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// Unknown target name or invalid target parameters.
    #[error("invalid target: {0}")]
    InvalidTarget(String),

    /// A dynamic-circuit tree violates a structural invariant.
    #[error("malformed dynamic circuit: {0}")]
    MalformedDynamicCircuit(String),

    /// Operation not defined for this measurement structure.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Kraus set does not satisfy the completeness relation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A probability distribution is not normalized.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Search exhausted its block budget without converging.
    #[error("no circuit found within budget (best cost {best_cost:.3e})")]
    NotFound { best_cost: f64 },

    /// A prescribed template failed to instantiate after retries.
    #[error("template mismatch: {0}")]
    TemplateMismatch(String),

    /// Input circuit contains a gate outside the supported set.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DcError>;
