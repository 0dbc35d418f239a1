use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum HfaError {
    /// Malformed or non-conforming arguments (dimension mismatch, bad parameter range).
    #[error("invalid input: {0}")]
    Input(String),

    /// The problem is well-formed but has no meaningful solution (e.g. a single label class).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// A text file could not be parsed; `line` is 1-based.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// The sampling protocol cannot be satisfied by the supplied data.
    #[error("infeasible protocol: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HfaError {
    pub fn input(msg: impl Into<String>) -> Self {
        HfaError::Input(msg.into())
    }

    pub fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        HfaError::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HfaError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HfaError>;
