//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{map} mirror map domain violation at coordinate {index} (value {value})")]
    DomainViolation {
        map: &'static str,
        index: usize,
        value: f64,
    },

    #[error("linear program is infeasible (data not separable)")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
