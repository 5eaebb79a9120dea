use thiserror::Error;

pub type Result<T> = std::result::Result<T, LatcError>;

/// Errors raised by the solver and its supporting routines.
#[derive(Debug, Error)]
pub enum LatcError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid unfolding mode {0}; expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("{len} time points are not divisible by season length {season}")]
    NotDivisible { len: usize, season: usize },

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("truncation {theta} must be smaller than the matrix side {min_dim}")]
    InvalidTruncation { theta: usize, min_dim: usize },

    #[error("design matrix has no rows")]
    EmptyDesign,

    #[error("invalid lag set: {0}")]
    InvalidLags(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no observed entries in the input")]
    AllMissing,

    #[error("window out of range: {0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Dimension,
    Config,
    Io,
}

impl LatcError {
    pub fn class(&self) -> ErrorClass {
        match self {
            LatcError::Parse(_) => ErrorClass::Parse,
            LatcError::Io(_) => ErrorClass::Io,
            LatcError::Config(_)
            | LatcError::InvalidLags(_)
            | LatcError::InvalidTruncation { .. }
            | LatcError::InvalidMode(_) => ErrorClass::Config,
            LatcError::Dimension(_)
            | LatcError::NotDivisible { .. }
            | LatcError::NonFinite
            | LatcError::EmptyDesign
            | LatcError::AllMissing
            | LatcError::OutOfRange(_) => ErrorClass::Dimension,
        }
    }
}

impl From<csv::Error> for LatcError {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => LatcError::Io(io),
                _ => unreachable!(),
            }
        } else {
            LatcError::Parse(err.to_string())
        }
    }
}
