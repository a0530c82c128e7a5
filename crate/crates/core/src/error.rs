use thiserror::Error;

/// Errors raised by construction, linear algebra and simulation routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("value {0} outside the unit interval")]
    OutOfUnitInterval(String),

    #[error("duplicate Vandermonde node {0}")]
    DuplicateNode(String),

    #[error("value {0} has no representative in the field")]
    NotRepresentable(String),

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("{what} = {value} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
