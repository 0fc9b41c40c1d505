use std::io;
use std::path::{Path, PathBuf};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: line {line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("nothing to report: {0}")]
    Empty(String),
    #[error("{0}")]
    Core(#[from] fluorocnn_core::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: reason.into(),
        }
    }

    pub fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use fluorocnn_core::Error as C;
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } | Error::Input(_) => EXIT_INPUT,
            Error::Empty(_) => EXIT_EMPTY,
            Error::Json(_) => EXIT_INTERNAL,
            Error::Core(e) => match e {
                C::Internal(_) | C::Divergence { .. } => EXIT_INTERNAL,
                C::Fold { source, .. } => Error::Core((**source).clone()).exit_code(),
                C::EmptyDataset => EXIT_EMPTY,
                _ => EXIT_INPUT,
            },
        }
    }
}
