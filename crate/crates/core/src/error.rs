use thiserror::Error;

/// Errors raised by the library. Indices are 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points {a} and {b} coincide")]
    CoincidentPoints { a: usize, b: usize },

    #[error("a configuration needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),

    #[error("delta factor for pair ({a}, {b}) is exactly zero")]
    DegenerateDelta { a: usize, b: usize },

    #[error("n = {n} exceeds the exact enumeration limit {max}; use the sampled estimator")]
    TooLarge { n: usize, max: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("expected n = {expected}, got {got}")]
    WrongN { expected: usize, got: usize },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("candidate enumeration exceeds the cap of {cap} raw terms")]
    BasisTooLarge { cap: usize },

    #[error("system has {rows} rows for {cols} unknowns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
