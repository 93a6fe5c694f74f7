use std::path::PathBuf;

use thiserror::Error;

use crate::daycount::Date;
use crate::formula::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid date {0}")]
    InvalidDate(String),

    #[error("date {0} is outside the supported range 1900-01-01..=2199-12-31")]
    DateOutOfRange(String),

    #[error("start date {start} is after end date {end}")]
    Ordering { start: Date, end: Date },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("period {period} out of range 1..={max}: {reason}")]
    PeriodOutOfRange {
        period: u32,
        max: u32,
        reason: &'static str,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("unknown rule id `{0}`")]
    UnknownRule(String),

    #[error("invalid rate `{0}`")]
    InvalidRate(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("cannot load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid rule config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
