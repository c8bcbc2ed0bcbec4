//! Weighted b-matching on bipartite item/consumer graphs, run on a
//! deterministic simulated MapReduce runtime.
//!
//! * [`greedy`]: sequential greedy and its round-based counterpart.
//! * [`stack`]: primal-dual stack algorithms, relaxed and feasible.
//! * [`maximal`]: randomized maximal b-matching used by the stack push phase.
//! * [`simjoin`]: thresholded similarity join producing candidate edges.
//! * [`capacity`] and [`synth`]: capacities and synthetic datasets.
//! * [`oracle`]: exact optimum for small graphs.

pub mod capacity;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod greedy;
pub mod io;
pub mod maximal;
pub mod mr;
pub mod oracle;
pub mod simjoin;
pub mod stack;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, EdgeKey, EdgeRecord, EdgeState, Matching, NodeId, Side};
