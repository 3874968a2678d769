use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed raw dataset. `row` is the 1-based data row (header excluded) when known.
    #[error("parse error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Parse { row: Option<usize>, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("no recognized symptoms (unknown: {})", unknown.join(", "))]
    Encode { unknown: Vec<String> },

    #[error("invalid value: {0}")]
    Value(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(row: impl Into<Option<usize>>, message: impl Into<String>) -> Self {
        Error::Parse {
            row: row.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }

    pub(crate) fn value(message: impl Into<String>) -> Self {
        Error::Value(message.into())
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::Dimension { expected, actual })
        }
    }
}
