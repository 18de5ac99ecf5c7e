use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape has {got} layers, supernet has {expected}")]
    LayerCount { expected: usize, got: usize },

    #[error("layer {layer} (`{name}`): {msg}")]
    LayerBounds {
        layer: usize,
        name: String,
        msg: String,
    },

    #[error("invalid supernet spec: {0}")]
    Spec(String),

    #[error("invalid pick `{pick}`: {msg}")]
    Pick { pick: String, msg: String },

    #[error("invalid encoded vector: {0}")]
    Encoding(String),

    #[error("invalid hardware config: {0}")]
    Hardware(String),

    #[error("subgraph `{id}` needs {bytes} bytes but the persistent buffer holds {capacity}")]
    Capacity { id: String, bytes: u64, capacity: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("stale latency table: built for hardware {table}, replaying on {hardware}")]
    StaleTable { table: String, hardware: String },

    #[error("cache hit ratio undefined for an all-zero subnet vector")]
    UndefinedRatio,

    #[error("cannot aggregate an empty record set")]
    EmptyAggregate,

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
