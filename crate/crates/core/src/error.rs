use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("input error: {0}")]
    Input(String),

    #[error("point is not in the domain: {0}")]
    NotInDomain(String),

    #[error("direction is not admissible: {0}")]
    NotAdmissible(String),

    #[error("vector is not a subgradient: {0}")]
    NotSubgradient(String),

    #[error("pieces {0} and {1} disagree on their common domain")]
    InconsistentPieces(usize, usize),

    #[error("invalid piece {0}: {1}")]
    InvalidPiece(usize, String),

    #[error("msqc_unlicensed: {0}")]
    MsqcUnlicensed(String),

    #[error("multiplier set is empty")]
    EmptyMultiplierSet,

    #[error("stationarity does not hold at the given point")]
    NotStationary,

    #[error("invalid KKT pair: {0}")]
    InvalidKkt(String),

    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
