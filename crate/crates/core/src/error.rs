use alloc::string::String;

use crate::params::RegimeTag;

/// Errors raised by evaluation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("estimator for {expected} called in regime {actual}")]
    Regime { expected: &'static str, actual: RegimeTag },
    #[error("gamma = {gamma} is an integer; use the bound certificate")]
    IntegerGamma { gamma: f64 },
    #[error("certificate refused: {0}")]
    CertificateRefused(String),
    #[error("quadrature did not converge: error estimate {error_estimate:e} after {panels} panels")]
    Convergence { error_estimate: f64, panels: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Non-fatal conditions attached to otherwise valid results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// Cancellation exceeded the significand budget minus 12 decimal digits.
    Precision { cancellation_digits: f64, budget_digits: f64 },
    /// `a` is within 5% of the interval width from a regime boundary.
    Breakdown { distance: f64 },
    /// `gamma` is within ten times the integer tolerance of an integer.
    NearInteger { offset: f64 },
}
