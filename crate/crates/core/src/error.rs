use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("radicand {0} is not a squarefree integer different from 0 and 1")]
    NotSquarefree(i64),

    #[error("field too large: |discriminant| = {disc} exceeds cap {cap}")]
    FieldTooLarge { disc: i64, cap: i64 },

    #[error("elements belong to different fields")]
    FieldMismatch,

    #[error("{0}: zero input")]
    ZeroInput(&'static str),

    #[error("{0} is not prime")]
    NotPrime(BigUint),

    /// The factorization budget ran out before the cofactor was split.
    #[error("incomplete factorization of {n}: composite cofactor {cofactor} remains")]
    IncompleteFactorization {
        n: BigUint,
        found: Vec<(BigUint, u32)>,
        cofactor: BigUint,
    },

    #[error("A3 undefined at unit rank 0")]
    A3Undefined,

    #[error("no generator of {ideal} found within search bound {bound}")]
    GeneratorNotFound { ideal: String, bound: u64 },

    #[error("place does not belong to the field of the element")]
    PlaceMismatch,

    #[error("S must contain every archimedean place")]
    MissingArchimedean,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing configuration value: {0}")]
    MissingConfig(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
