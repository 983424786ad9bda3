use std::fmt;

use thiserror::Error;

/// A single failed check on a flute descriptor. Indices are 1-based, matching
/// the cuff numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveLength { index: usize },
    Decreasing { index: usize },
    LengthCountMismatch { expected: usize, found: usize },
    TruncationTooSmall { truncation: usize },
    HalfIndexZero,
    HalfIndexNotIncreasing { index: usize },
    HalfIndexBeyondTruncation { index: usize, truncation: usize },
    NoWitnessHalfTwist,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveLength { index } => {
                write!(f, "length at index {index} is not positive")
            }
            Violation::Decreasing { index } => {
                write!(f, "lengths decrease at index {index}")
            }
            Violation::LengthCountMismatch { expected, found } => {
                write!(f, "expected {expected} lengths, found {found}")
            }
            Violation::TruncationTooSmall { truncation } => {
                write!(f, "truncation {truncation} is below 2")
            }
            Violation::HalfIndexZero => write!(f, "half-twist indices start at 1"),
            Violation::HalfIndexNotIncreasing { index } => {
                write!(f, "half-twist index {index} does not increase")
            }
            Violation::HalfIndexBeyondTruncation { index, truncation } => {
                write!(
                    f,
                    "half-twist index {index} exceeds truncation {truncation}"
                )
            }
            Violation::NoWitnessHalfTwist => write!(
                f,
                "pattern declared infinite but has no half-twist inside the truncation window"
            ),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coincident points: {first} and {second}")]
    Coincident {
        first: &'static str,
        second: &'static str,
    },

    #[error("invalid descriptor: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("hypothesis refused: {0}")]
    Refused(String),

    #[error("precision exhausted at step {step}: {detail}; raise --precision-bits")]
    PrecisionExhausted { step: usize, detail: String },

    #[error("nestedness violated at step {step}")]
    NotNested { step: usize },

    #[error("too few terms: need at least {needed}, got {got}")]
    TooFewTerms { needed: usize, got: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
