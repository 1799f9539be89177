//! Command-line driver for the soda-citron association engine.
//!
//! The binary orchestrates the core crate end to end: `simulate` writes a
//! scenario's ground truth and detection stream, `run` feeds a stream
//! through an engine with periodic checkpoint evaluation, `montecarlo`
//! repeats seeded runs for both methods and tests the paired differences,
//! `bench` measures throughput and scaling, and `evaluate` scores a saved
//! estimate set. Everything is also callable as a library, which is how
//! the acceptance suite drives it.

pub mod args;
pub mod commands;
pub mod driver;

use std::fmt;

/// Errors surfaced to the operator, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unusable config, or unwritable output (exit 1).
    Usage(String),
    /// Unreadable or malformed input data (exit 2).
    Data(String),
    /// Broken internal invariant (exit 3).
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<soda_citron::Error> for CliError {
    fn from(e: soda_citron::Error) -> Self {
        use soda_citron::Error as E;
        match &e {
            E::InvalidParams(_) | E::RadiusExceedsCellSize { .. } | E::InsufficientSamples(_) => {
                CliError::Usage(e.to_string())
            }
            E::MalformedStream { .. } | E::InvalidDetection(_) | E::NonSpdCovariance => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}
