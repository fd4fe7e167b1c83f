use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("{}: {inner}", path.display())]
    File { path: PathBuf, inner: Box<Error> },

    #[error("line {line}: expected {expected} values, found {found}")]
    InconsistentDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse {field:?} as a number")]
    NonNumeric { line: usize, field: String },

    #[error("line {line}: token {token:?} contains whitespace")]
    TokenWithWhitespace { line: usize, token: String },

    #[error("input contains no embeddings")]
    EmptyInput,

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("header declares {declared} records but {found} were found")]
    CountMismatch { declared: usize, found: usize },

    #[error("invalid embedding set: {0}")]
    InvalidSet(String),

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vector norm {norm:e} is below tolerance")]
    ZeroVector { norm: f64 },

    #[error("vector for token {token:?} has norm {norm:e}, cannot normalize")]
    ZeroTokenVector { token: String, norm: f64 },

    #[error("dimension {index} has norm {norm:e} across the vocabulary, cannot normalize")]
    ZeroColumn { index: usize, norm: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty vocabulary intersection")]
    EmptyIntersection,

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("malformed dataset: {0}")]
    MalformedDataset(String),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            inner: Box::new(self),
        }
    }
}
