use thiserror::Error;

/// Errors raised by evaluators, filter builders and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A series or product could not certify its tail within the term budget.
    #[error("{what}: tail bound not met within {max_terms} terms")]
    Truncation { what: &'static str, max_terms: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("non-finite intermediate in {0}")]
    NonFinite(&'static str),

    #[error("offset interpolant denominator nearly vanishes (min/max = {ratio:e})")]
    SingularOffset { ratio: f64 },

    #[error("quadrature did not converge (error estimate {estimate:e}, tolerance {tolerance:e})")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("oracle inconsistency: {0}")]
    Inconsistent(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// JSON or CSV encoding and decoding.
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
