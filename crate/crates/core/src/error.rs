use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A record could not be read. `line` is 1-based and counts the header.
    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty data: the table has no observations")]
    EmptyData,

    #[error("positivity violation: {0}")]
    Positivity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("untestable: {0}")]
    Untestable(String),

    #[error("realization error: {0}")]
    Realization(String),

    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Schema(_) => "schema",
            Error::EmptyData => "empty-data",
            Error::Positivity(_) => "positivity",
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Untestable(_) => "untestable",
            Error::Realization(_) => "realization",
            Error::Numerical { .. } => "numerical",
            Error::Model(_) => "model",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
