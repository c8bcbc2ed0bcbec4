use thiserror::Error;

use crate::graph::{EdgeKey, NodeId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {0} is not part of the graph")]
    UnknownEdge(EdgeKey),

    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),

    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeKey),

    #[error("edge {key} has non-positive or non-finite weight {weight}")]
    InvalidWeight { key: EdgeKey, weight: f64 },

    #[error("edge endpoints {0} and {1} lie on the same side")]
    NotBipartite(NodeId, NodeId),

    #[error("self-loop at {0}")]
    SelfLoop(NodeId),

    #[error("round {round} ({phase}) failed at key {key}: {message}")]
    Round {
        round: usize,
        phase: String,
        key: String,
        message: String,
    },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("{what} did not converge within {limit} iterations")]
    IterationLimit { what: &'static str, limit: usize },

    #[error("instance has {edges} edges, exhaustive search is limited to {limit}")]
    TooLarge { edges: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
