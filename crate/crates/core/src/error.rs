use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}{hint}")]
    Singular {
        pivot: usize,
        value: f64,
        hint: &'static str,
    },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| exceeds tolerance")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cost weights must be strictly positive, found w[{index}] = {value:e}")]
    WeightDomain { index: usize, value: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Broad failure classes, used by the command-line front end to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter(_) => ErrorKind::Usage,
            Error::Shape { .. }
            | Error::Format(_)
            | Error::Length { .. }
            | Error::Consistency(_)
            | Error::Io { .. }
            | Error::Degenerate(_) => ErrorKind::Data,
            Error::Singular { .. }
            | Error::NotSymmetric { .. }
            | Error::NonFinite(_)
            | Error::WeightDomain { .. } => ErrorKind::Numerical,
            Error::Trial { source, .. } => source.kind(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
