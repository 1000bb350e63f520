use thiserror::Error;

/// Errors raised across the crate, grouped by how the CLI reports them:
/// configuration problems exit with code 1, data problems with code 2,
/// numerical failures with code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Contradictory or out-of-range configuration (bad flags, bad schedules).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("invalid data: {0}")]
    Data(String),

    /// A CSV row that could not be parsed, with its 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Non-finite intermediate values, domain errors, failed guards.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
            Error::Numeric(_) => 3,
        }
    }

    /// Prefix the error message with context (e.g. which fold failed).
    pub fn with_context(self, context: &str) -> Error {
        match self {
            Error::Config(m) => Error::Config(format!("{context}: {m}")),
            Error::Data(m) => Error::Data(format!("{context}: {m}")),
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{context}: {message}"),
            },
            Error::Numeric(m) => Error::Numeric(format!("{context}: {m}")),
            other => other,
        }
    }
}
