use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph construction, instance generation and the
/// matching algorithms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("vertex {id} out of range for graph with {count} vertices")]
    VertexOutOfRange { id: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate overlap: no vertex survives in both sampled graphs")]
    DegenerateOverlap,

    #[error("seed size {requested} exceeds ground truth size {available}")]
    SeedTooLarge { requested: usize, available: usize },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("threshold must be 1 or 2, got {0}")]
    InvalidThreshold(u32),

    #[error("brute-force oracle supports at most {limit} vertices per graph, got {got}")]
    OracleTooLarge { limit: usize, got: usize },

    #[error("malformed trace at event {index}: {reason}")]
    MalformedTrace { index: usize, reason: String },

    #[error("parse error in {source_name} line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
