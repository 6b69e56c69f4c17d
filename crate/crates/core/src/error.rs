use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("could not factor cofactor {0} within budget")]
    Unfactored(BigInt),
    #[error("{0} is not squarefree")]
    NotSquarefree(BigInt),
    #[error("bad reduction at p = {0}")]
    BadPrime(u64),
    #[error("prime {p} divides denominator {den}")]
    Inadmissible { p: u64, den: BigInt },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("conflicting evidence: {0}")]
    Integrity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
