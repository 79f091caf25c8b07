use std::io;

use thiserror::Error;

use crate::state::CoupleState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid individual state {0}; expected one of -1, 0, 1, 2")]
    InvalidState(i64),

    #[error("unknown state name {0:?}")]
    UnknownStateName(String),

    #[error("couple index {0} out of range 0..16")]
    IndexOutOfRange(usize),

    #[error("{name} = {value} is outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },

    #[error("distribution is not normalized: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("transition {from} -> {to} has zero probability")]
    ImpossibleTransition { from: CoupleState, to: CoupleState },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects parameters outside the closed unit interval (NaN included).
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ParamOutOfRange { name, value })
    }
}
