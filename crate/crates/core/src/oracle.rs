//! Exact maximum-weight b-matching by exhaustive search, for small
//! instances only.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{heavier_first, BipartiteGraph, EdgeKey, Matching, NodeId};

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_edges: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_edges: 22 }
    }
}

#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub matching: Matching,
    pub value: f64,
    /// Feasible leaves visited by the search.
    pub leaves: u64,
}

struct Search<'a> {
    edges: &'a [(f64, EdgeKey)],
    suffix: Vec<f64>,
    residual: BTreeMap<NodeId, u32>,
    chosen: Vec<bool>,
    value: f64,
    best: f64,
    best_set: Vec<bool>,
    leaves: u64,
}

impl Search<'_> {
    fn run(&mut self, i: usize) {
        if i == self.edges.len() {
            self.leaves += 1;
            if self.value > self.best {
                self.best = self.value;
                self.best_set.clone_from(&self.chosen);
            }
            return;
        }
        if self.value + self.suffix[i] <= self.best {
            return;
        }
        let (w, key) = self.edges[i];
        let fits = key.endpoints().iter().all(|n| self.residual[n] > 0);
        if fits {
            for n in key.endpoints() {
                *self.residual.get_mut(&n).expect("endpoint") -= 1;
            }
            self.chosen[i] = true;
            self.value += w;
            self.run(i + 1);
            self.value -= w;
            self.chosen[i] = false;
            for n in key.endpoints() {
                *self.residual.get_mut(&n).expect("endpoint") += 1;
            }
        }
        self.run(i + 1);
    }
}

/// Maximum-weight feasible b-matching. Refuses graphs with more than
/// `limits.max_edges` edges.
pub fn exact_b_matching(g: &BipartiteGraph, limits: OracleLimits) -> Result<ExactSolution> {
    if g.edge_count() > limits.max_edges {
        return Err(Error::TooLarge {
            edges: g.edge_count(),
            limit: limits.max_edges,
        });
    }
    let mut edges: Vec<(f64, EdgeKey)> = g.edges().iter().map(|e| (e.weight, e.key)).collect();
    edges.sort_by(|a, b| heavier_first(*a, *b));
    let mut suffix = vec![0.0; edges.len() + 1];
    for i in (0..edges.len()).rev() {
        suffix[i] = suffix[i + 1] + edges[i].0;
    }
    let mut s = Search {
        edges: &edges,
        suffix,
        residual: g.capacities().clone(),
        chosen: vec![false; edges.len()],
        value: 0.0,
        best: 0.0,
        best_set: vec![false; edges.len()],
        leaves: 0,
    };
    s.run(0);
    let matching: Matching = edges
        .iter()
        .zip(&s.best_set)
        .filter(|(_, &c)| c)
        .map(|((_, k), _)| *k)
        .collect();
    Ok(ExactSolution {
        matching,
        value: s.best,
        leaves: s.leaves,
    })
}
