//! Crate-wide error type.
//!
//! One enum covers every module so that callers (and the C ABI) can map
//! failures onto a single set of codes. Variants carry the offending values;
//! messages state what was violated, not where it was detected.

use thiserror::Error;

/// Everything that can go wrong in the library proper.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the closed unit cube.
    #[error("coordinate {value} on axis {axis} is outside [0, 1]")]
    OutOfDomain { axis: usize, value: f64 },

    /// A snapshot index is outside 1..=T.
    #[error("snapshot {t} is outside 1..={t_count}")]
    BadSnapshot { t: usize, t_count: usize },

    /// Two dimensioned quantities disagree.
    #[error("dimension mismatch: {what} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// A value left its admissible interval.
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A count that must divide evenly does not.
    #[error("{what} = {value} is not divisible by {by}")]
    Divisibility {
        what: &'static str,
        value: usize,
        by: usize,
    },

    /// A parameter fails its constructor's precondition.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A message header does not decode to a valid cell pair.
    #[error("malformed message header: {reason}")]
    MalformedHeader { reason: String },

    /// A message payload has the wrong number of bits for the schedule.
    #[error("payload carries {got} bits, schedule requires {expected}")]
    WrongPayloadLength { got: usize, expected: usize },

    /// A supercell estimate was offered the wrong number of bits.
    #[error("estimate needs exactly {expected} bits, got {got}")]
    WrongCount { expected: usize, got: usize },

    /// A dither response curve is not strictly increasing where inversion
    /// needs it to be.
    #[error("dither mean response is not strictly increasing over [{lo}, {hi}]")]
    NonMonotoneDither { lo: f64, hi: f64 },

    /// A config file failed to parse or a value failed validation; the
    /// message names the offending file and line.
    #[error("{path}:{line}: {reason}")]
    Config {
        path: String,
        line: usize,
        reason: String,
    },

    /// No closed-form modulus of continuity exists for the field kind.
    #[error("no closed-form modulus for field kind {kind}")]
    NoClosedForm { kind: &'static str },

    /// Fisher-information quadrature diverged; the density is not regular.
    #[error("Fisher information quadrature diverges; density is not regular")]
    NonRegularPdf,

    /// An I/O failure while writing or reading artifacts.
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True when the error concerns model consistency (as opposed to config
    /// syntax or numeric breakdown); the CLI maps these to exit code 3.
    pub fn is_model_error(&self) -> bool {
        !matches!(
            self,
            Error::NonRegularPdf | Error::Io { .. } | Error::Config { .. }
        )
    }

    /// True for config parse/validation failures (CLI exit code 2).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
