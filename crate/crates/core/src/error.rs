use thiserror::Error;

use crate::grid::GridPoint;

/// Errors raised across the library.
///
/// Variants are grouped so that a front end can map them onto exit codes:
/// [`Error::Parse`] for malformed input, [`Error::Guard`] for size guards and
/// everything else as a validation failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("parse error: {0}")]
    Syntax(String),

    #[error("{0}")]
    Validation(String),

    #[error("{what} exceeds guard: {actual} > {limit}")]
    Guard {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("field modulus mismatch: {0} vs {1}")]
    FieldMismatch(u32, u32),

    #[error("{0} is not a prime modulus")]
    NotPrime(u32),

    #[error("point {0} lies outside the domain")]
    OutsideDomain(GridPoint),

    #[error("points {0} and {1} are not ordered as required")]
    NotOrdered(GridPoint, GridPoint),

    #[error("point set is not an interval: {0}")]
    NotInterval(String),

    #[error("commutativity fails on the square at {0}")]
    NotCommutative(GridPoint),

    #[error("not a section: {0}")]
    NotSection(String),

    #[error("not a submodule: {0}")]
    NotSubmodule(String),

    #[error("summand identification failed on {0}")]
    Summand(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Syntax(_))
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
