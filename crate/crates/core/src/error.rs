use std::path::PathBuf;

use crate::index_plan::SnapshotError;
use crate::regex_literal::ParseError;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset has zero records")]
    ZeroRecords,
    #[error("query set is empty")]
    ZeroQueries,
    #[error("record {0} contains a newline byte")]
    RecordHasNewline(u32),
    #[error(transparent)]
    Pattern(#[from] ParseError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
