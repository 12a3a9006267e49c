use thiserror::Error;

use crate::fields::{Field, SpectralField};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The reference solver exceeded its overflow guard.
    #[error("blow-up at t = {time}")]
    BlowUp { time: f64, last: Box<Field> },

    /// The Fujita-form integrator overflowed.
    #[error("spectral blow-up at t = {time}")]
    SpectralBlowUp { time: f64, last: Box<SpectralField> },

    /// The Bernoulli solution crossed its pole: the base of the power is not positive.
    #[error("pole of the Bernoulli solution (base = {base}) at s = {s}, t = {t}")]
    Pole { s: f64, t: f64, base: f64 },

    #[error("quadrature did not converge: value {value}, error estimate {error_estimate} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
