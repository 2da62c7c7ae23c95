use thiserror::Error;

use crate::jet::MultiIndex;

/// Errors raised by the jet, normalization and chain machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("linear part is not invertible")]
    NonInvertible,

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    /// A homological coefficient exceeded the configured cap.
    #[error("small divisor at target {target}, index {index}: |alpha| = {magnitude:e}, divisor ratio {divisor:e}")]
    SmallDivisor {
        /// 1-based component.
        target: usize,
        index: MultiIndex,
        magnitude: f64,
        divisor: f64,
    },

    /// A complex resonance blocks autonomous linearization.
    #[error("complex resonance at target {target}, index {index}")]
    ComplexResonance { target: usize, index: MultiIndex },

    #[error("no convergence for entry {entry} after {iterations} iterations (last delta {last:e})")]
    NonConvergence {
        entry: usize,
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("scenario constraint violated: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
