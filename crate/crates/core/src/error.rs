use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// A malformed input or artifact file.
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    /// A parse problem tied to a specific input line.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A contract violation: bad argument, missing vocabulary entry, empty input.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn format(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
