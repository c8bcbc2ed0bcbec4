//! Simulated MapReduce runtime and the edge-state protocol built on it.

pub mod engine;
pub mod protocol;
pub mod rng;

pub use engine::{MrEngine, RoundLedger};
pub use protocol::{unify_edge_views, EdgeProtocol, NodeCtx, NodeState};
pub use rng::{keyed_rng, NodeRng};
