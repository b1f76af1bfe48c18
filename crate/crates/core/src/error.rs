use std::path::PathBuf;

use thiserror::Error;

use crate::fit::FitResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The linearized model has a pole at sigma = 1 with a zero sideband.
    #[error("variance diverges at sigma = {sigma}, omega = {omega}")]
    Divergence { sigma: f64, omega: f64 },

    #[error("measured variance {measured} does not exceed the electronic floor {floor}")]
    CorrectionImpossible { measured: f64, floor: f64 },

    #[error("sample rate {sample_rate} Hz too low: need more than {required} Hz")]
    BandwidthMismatch { sample_rate: f64, required: f64 },

    #[error("PDC channels {first} and {second} overlap")]
    OverlappingChannels { first: usize, second: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        best: Box<FitResult>,
    },

    #[error("{path}: line {line}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN and values outside `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(invalid(name, format!("{value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(invalid(name, format!("{value} must be finite and > 0")));
    }
    Ok(())
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(invalid(name, format!("{value} must be finite and >= 0")));
    }
    Ok(())
}
