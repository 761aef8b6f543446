use std::path::PathBuf;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph is finalized; no further vertices or edges may be added")]
    Finalized,
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("unknown vertex name `{0}`")]
    UnknownName(String),
    #[error("duplicate vertex name `{0}`")]
    DuplicateName(String),
    #[error("self-loop on vertex {0} rejected")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1} rejected")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("shortest-path count from source {0} exceeds 128 bits")]
    PathCountOverflow(VertexId),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("invalid vertex metadata for `{name}`: {message}")]
    InvalidMeta { name: String, message: String },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("attachment plan: {0}")]
    Plan(String),

    #[error("empty vertex set: {0}")]
    EmptySet(String),
    #[error("source and target sets overlap at vertex {0}")]
    OverlappingSets(VertexId),
    #[error("cannot normalize a table whose values are all zero")]
    AllZero,
    #[error("kernel density estimation needs at least two distinct values")]
    TooFewDistinct,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("scenario: {0}")]
    Scenario(String),

    #[error("malformed shard {path}: {message}")]
    MalformedShard { path: PathBuf, message: String },
    #[error("missing {} shard(s), first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    MissingShards(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from bad input data rather than an
    /// environment or internal failure.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData
            ),
            Error::PathCountOverflow(_) => false,
            _ => true,
        }
    }
}
