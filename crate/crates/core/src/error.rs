use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type. Variants map one-to-one onto the failure modes of
/// the frontend, the optimizer stages and the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown table `{0}`")]
    UnknownTable(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("ambiguous column `{0}`")]
    AmbiguousColumn(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("union children have different schemas: {0} vs {1}")]
    UnionSchemaMismatch(String, String),

    #[error("invalid plan path {0:?}")]
    InvalidPath(Vec<usize>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("covering expression alignment failed: {0}")]
    InternalShapeMismatch(String),

    #[error("missing statistics for table `{0}`")]
    MissingStats(String),

    #[error("relation is empty")]
    EmptyRelation,

    #[error("instance too large for exhaustive search ({0} combinations)")]
    TooLarge(u128),

    #[error("no cache entry `{0}`")]
    MissingCacheEntry(String),

    #[error("engine type error: {0}")]
    EngineType(String),

    #[error("{path} line {line}: {message}")]
    CsvParse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
