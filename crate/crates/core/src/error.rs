use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient prefix: {0}")]
    InsufficientPrefix(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("set is not decomposable into successive maximal members")]
    NotDecomposable,
    #[error("no auxiliary embedding found within the search budget")]
    AuxiliaryNotFound,
    #[error("unsupported scalar mix: {0}")]
    UnsupportedScalarMix(String),
    #[error("numeric tolerance not met: {0}")]
    NumericTolerance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
