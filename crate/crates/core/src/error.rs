use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("semantic error at {line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },

    #[error("horizon {0} exceeds the 63-bit limit")]
    HorizonOverflow(u128),

    #[error("membership oracle failed at n={n}: {msg}")]
    Oracle { n: u64, msg: String },

    #[error("target {0} lies outside [0,1]")]
    TargetRange(String),

    #[error("target denominator {0} too large for exact comparison")]
    TargetPrecision(String),

    #[error("no exact charge available for `{0}`")]
    MissingCharge(String),

    #[error("sets are not pairwise disjoint: {n} belongs to sets {i} and {j}")]
    DisjointViolation { n: u64, i: usize, j: usize },

    #[error("subset precondition violated: {n} is in the lower set but not the upper")]
    SubsetViolation { n: u64 },

    #[error("chain order violated between elements {i} and {j}: witness {n}")]
    OrderViolation { i: usize, j: usize, n: u64 },

    #[error("charges are not non-decreasing along the chain at position {0}")]
    ChargeOrder(usize),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
