use thiserror::Error;

use crate::estimation::BoundaryViolation;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wrong graph kind: expected {expected} graph, got {found}")]
    WrongGraphKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch for {what}: expected {expected}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("not a permutation of 0..{n}")]
    InvalidPermutation { n: usize },

    #[error("invalid block assignment: {0}")]
    InvalidBlocks(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("non-finite parameter in {0}")]
    NonFiniteParameter(&'static str),

    #[error("maximum likelihood estimate does not exist: {reason}")]
    NonexistentMle {
        reason: String,
        violations: Vec<BoundaryViolation>,
        /// Nodes (or blocks) whose parameters diverged.
        diverging: Vec<usize>,
    },

    #[error("parameters are not identifiable; null direction over {names:?}: {direction:?}")]
    UnidentifiableParameters {
        names: Vec<String>,
        direction: Vec<f64>,
    },

    #[error("enumeration limit exceeded: n={n} ({kind}) allows at most n={max}")]
    EnumerationLimit {
        n: usize,
        kind: &'static str,
        max: usize,
    },

    #[error("probe evaluated outside its domain box at ({u}, {v})")]
    OutsideDomain { u: f64, v: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
