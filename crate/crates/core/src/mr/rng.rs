//! Per-node random streams keyed by `(seed, round, node)`.
//!
//! Every node-local coin flip draws from its own stream, so sequential and
//! parallel execution observe identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, Side};

pub type NodeRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn keyed_rng(seed: u64, round: usize, node: NodeId) -> NodeRng {
    let side = match node.side {
        Side::Item => 0u64,
        Side::Consumer => 1u64,
    };
    let mut h = splitmix(seed);
    h = splitmix(h ^ round as u64);
    h = splitmix(h ^ (side << 32 | u64::from(node.index)));
    ChaCha8Rng::seed_from_u64(h)
}
