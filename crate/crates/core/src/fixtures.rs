//! Small instances shared by tests, benchmarks and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{BipartiteGraph, NodeId};

/// Triangle `u, v, z` with `b(u) = b(z) = 1`, `b(v) = 2`,
/// `w(uv) = w(vz) = 1` and `w(zu) = 1 + eps`.
///
/// Greedy takes `zu` alone while the optimum `{uv, vz}` is worth 2. The
/// triangle is not bipartite, so it can only be built inside the crate.
pub fn triangle(eps: f64) -> (BipartiteGraph, [NodeId; 3]) {
    let mut g = BipartiteGraph::new();
    let u = g.add_item(1);
    let v = g.add_consumer(2);
    let z = g.add_item(1);
    g.insert_edge(u, v, 1.0).expect("fresh edge");
    g.insert_edge(v, z, 1.0).expect("fresh edge");
    g.insert_edge(z, u, 1.0 + eps).expect("fresh edge");
    (g, [u, v, z])
}

/// Knobs for [`random_bipartite`].
#[derive(Clone, Copy, Debug)]
pub struct RandomInstance {
    pub max_nodes: u32,
    pub max_edges: usize,
    pub max_capacity: u32,
    /// Weights are drawn as `exp(U * ln(weight_spread))`, so the ratio
    /// between the heaviest and lightest edge stays below `weight_spread`.
    pub weight_spread: f64,
}

impl Default for RandomInstance {
    fn default() -> Self {
        RandomInstance {
            max_nodes: 12,
            max_edges: 20,
            max_capacity: 3,
            weight_spread: 10.0,
        }
    }
}

/// A random bipartite instance with at least one node per side.
pub fn random_bipartite(seed: u64, p: RandomInstance) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=p.max_nodes.max(2));
    let items = rng.random_range(1..n);
    let consumers = n - items;
    let mut g = BipartiteGraph::new();
    let ts: Vec<NodeId> = (0..items)
        .map(|_| g.add_item(rng.random_range(1..=p.max_capacity)))
        .collect();
    let cs: Vec<NodeId> = (0..consumers)
        .map(|_| g.add_consumer(rng.random_range(1..=p.max_capacity)))
        .collect();
    let possible = ts.len() * cs.len();
    let wanted = rng.random_range(0..=p.max_edges.min(possible));
    let pairs = rand::seq::index::sample(&mut rng, possible, wanted);
    let spread = p.weight_spread.max(1.0).ln();
    for idx in pairs {
        let w = (rng.random::<f64>() * spread).exp();
        g.add_edge(ts[idx / cs.len()], cs[idx % cs.len()], w)
            .expect("distinct pairs");
    }
    g
}

/// A random bipartite graph with exactly `items + consumers` nodes and
/// `min(edges, items * consumers)` distinct edges.
pub fn sized_bipartite(
    seed: u64,
    items: u32,
    consumers: u32,
    edges: usize,
    max_capacity: u32,
    weight_spread: f64,
) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = BipartiteGraph::new();
    let ts: Vec<NodeId> = (0..items)
        .map(|_| g.add_item(rng.random_range(1..=max_capacity.max(1))))
        .collect();
    let cs: Vec<NodeId> = (0..consumers)
        .map(|_| g.add_consumer(rng.random_range(1..=max_capacity.max(1))))
        .collect();
    let possible = ts.len() * cs.len();
    let pairs = rand::seq::index::sample(&mut rng, possible, edges.min(possible));
    let spread = weight_spread.max(1.0).ln();
    for idx in pairs {
        let w = (rng.random::<f64>() * spread).exp();
        g.add_edge(ts[idx / cs.len()], cs[idx % cs.len()], w)
            .expect("distinct pairs");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_shape() {
        let (g, [u, v, z]) = triangle(0.1);
        assert_eq!(g.edge_count(), 3);
        assert!(!g.is_bipartite());
        assert_eq!(g.capacity(v).unwrap(), 2);
        assert_eq!(g.capacity(u).unwrap() + g.capacity(z).unwrap(), 2);
    }

    #[test]
    fn random_instances_respect_bounds() {
        for seed in 0..100 {
            let g = random_bipartite(seed, RandomInstance::default());
            assert!(g.node_count() <= 12 && g.edge_count() <= 20);
            assert!(g.is_bipartite());
            assert!(g.capacities().values().all(|&c| (1..=3).contains(&c)));
        }
    }

    #[test]
    fn sized_instances_hit_requested_shape() {
        let g = sized_bipartite(3, 8, 8, 40, 2, 100.0);
        assert_eq!((g.node_count(), g.edge_count()), (16, 40));
        assert_eq!(sized_bipartite(3, 2, 2, 40, 2, 1.0).edge_count(), 4);
    }
}
