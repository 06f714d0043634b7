use thiserror::Error;

/// Errors raised while building spaces, operators and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A space document or constructor input violated the schema. `path` names
    /// the offending field, e.g. `weights[3]` or `distance_matrix[0][1]`.
    #[error("{path}: {message}")]
    InvalidSpace { path: String, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point index {index} out of range for space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    /// Any error while reading or parsing the named file.
    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn space(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidSpace {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_file(path: impl Into<std::path::PathBuf>, source: Error) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(source),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
