use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// The data does not agree with the declared schema (unknown level,
    /// missing column, bad level universe, ...).
    #[error("schema violation: {0}")]
    Schema(String),

    /// A cell could not be parsed as the type its column declares.
    #[error("parse error in column `{column}`, row {row}: cannot read {value:?}")]
    Parse {
        column: String,
        row: usize,
        value: String,
    },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("tree error: {0}")]
    Tree(String),

    /// No predictor has a non-degenerate available set at the node.
    #[error("no valid decision rule can be drawn at node {node}")]
    NoValidRule { node: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty fold: {0}")]
    EmptyFold(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
