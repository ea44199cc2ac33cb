use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate sequence (zero variance)")]
    DegenerateSequence,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InsError {
    #[error("static alignment failed: {0}")]
    AlignmentFailed(String),
    #[error("timestamp {current} does not follow {previous}")]
    NonMonotonicTimestamp { previous: f64, current: f64 },
    #[error("covariance lost positive semi-definiteness (min eigenvalue {0:e})")]
    CovarianceNotPsd(f64),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlamError {
    #[error("all particle weights vanished; weights reset to uniform")]
    Degenerate,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid trajectory spec: {0}")]
    InvalidSpec(String),
    #[error("invalid terrain: {0}")]
    InvalidTerrain(String),
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

/// Any failure of an end-to-end run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Ins(#[from] InsError),
    #[error(transparent)]
    Slam(#[from] SlamError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
