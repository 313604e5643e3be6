use std::fmt;
use std::path::PathBuf;

/// Where in an input file a parse error occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Byte(u64),
    Line { line: usize, column: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Line { line, column } => write!(f, "line {line}, field {column}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Zero on the diagonal of a triangular system; index is 0-based.
    #[error("singular triangular matrix: zero diagonal entry at index {index}")]
    SingularTriangular { index: usize },

    #[error("matrix is singular to working precision (zero pivot at step {step})")]
    Singular { step: usize },

    #[error("factorization broke down: {0}")]
    Factorization(String),

    #[error("parse error in {path} at {at}: {message}")]
    Parse { path: PathBuf, at: Location, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable identifier, used as the CLI diagnostic prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidParameter(_) => "parameter",
            Error::EmptyInput(_) => "empty",
            Error::SingularTriangular { .. } => "singular-triangular",
            Error::Singular { .. } => "singular",
            Error::Factorization(_) => "factorization",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Serde(_) => "serde",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
