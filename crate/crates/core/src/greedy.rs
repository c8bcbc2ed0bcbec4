//! Greedy b-matching: the sequential scan and its round-based counterpart.
//!
//! In every round of [`GreedyMr`] a node first admits the edges that both
//! endpoints proposed in the previous round, lowers its residual capacity,
//! retires if saturated, and otherwise proposes its `residual` heaviest live
//! edges. Proposals follow the shared order of [`heavier_first`], so both
//! endpoints of the globally heaviest live edge always propose it.

use crate::error::{Error, Result};
use crate::graph::{heavier_first, BipartiteGraph, EdgeKey, EdgeState, Matching, NodeId};
use crate::mr::engine::MrEngine;
use crate::mr::protocol::{EdgeProtocol, NodeCtx, NodeState};

/// Scans edges by decreasing weight and keeps each one that still fits.
pub fn greedy_centralized(g: &BipartiteGraph) -> Matching {
    let mut order: Vec<(f64, EdgeKey)> = g.edges().iter().map(|e| (e.weight, e.key)).collect();
    order.sort_by(|a, b| heavier_first(*a, *b));
    let mut residual = g.capacities().clone();
    let mut m = Matching::new();
    for (_, key) in order {
        if key.endpoints().iter().all(|n| residual[n] > 0) {
            for n in key.endpoints() {
                *residual.get_mut(&n).expect("endpoint") -= 1;
            }
            m.insert(key);
        }
    }
    m
}

/// Path of `k` edges with weights `w0 · growth^i`, alternating item and
/// consumer nodes, all capacities 1.
pub fn worst_case_path(k: usize, w0: f64, growth: f64) -> Result<BipartiteGraph> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "path needs at least 2 edges, got {k}"
        )));
    }
    if !(w0.is_finite() && w0 > 0.0 && growth.is_finite() && growth > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need w0 > 0 and growth > 1, got {w0} and {growth}"
        )));
    }
    let mut g = BipartiteGraph::new();
    let nodes: Vec<NodeId> = (0..=k)
        .map(|i| {
            if i % 2 == 0 {
                g.add_item(1)
            } else {
                g.add_consumer(1)
            }
        })
        .collect();
    for i in 0..k {
        g.add_edge(nodes[i], nodes[i + 1], w0 * growth.powi(i as i32))?;
    }
    Ok(g)
}

fn greedy_stage(ctx: &mut NodeCtx) {
    let mut included = 0;
    for inc in &mut ctx.edges {
        if inc.own.state == EdgeState::Marked && inc.other.state == EdgeState::Marked {
            inc.own.state = EdgeState::InMaximalMatching;
            included += 1;
        } else if inc.other.state == EdgeState::Deleted {
            inc.own.state = EdgeState::Deleted;
        }
    }
    ctx.state.residual -= included;

    let mut live: Vec<usize> = (0..ctx.edges.len())
        .filter(|&i| {
            !matches!(
                ctx.edges[i].own.state,
                EdgeState::InMaximalMatching | EdgeState::Deleted
            )
        })
        .collect();
    if ctx.state.residual <= 0 {
        for i in live {
            ctx.edges[i].own.state = EdgeState::Deleted;
        }
        return;
    }
    live.sort_by(|&a, &b| {
        heavier_first(
            (ctx.edges[a].weight, ctx.edges[a].key),
            (ctx.edges[b].weight, ctx.edges[b].key),
        )
    });
    let budget = usize::try_from(ctx.state.residual).unwrap_or(usize::MAX);
    for (rank, i) in live.into_iter().enumerate() {
        ctx.edges[i].own.state = if rank < budget {
            EdgeState::Marked
        } else {
            EdgeState::InGraph
        };
    }
}

/// One row of the convergence trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub round: usize,
    pub value: f64,
    pub included_edges: usize,
}

/// Round-by-round greedy matching. Proposals are `Marked` halves; admitted
/// edges become `InMaximalMatching` and retired ones `Deleted`.
#[derive(Clone, Debug)]
pub struct GreedyMr {
    proto: EdgeProtocol,
    matching: Matching,
    value: f64,
    rounds: usize,
}

impl GreedyMr {
    pub fn new(g: &BipartiteGraph) -> Self {
        let proto = EdgeProtocol::new(g.edges().iter().map(|e| (e.key, e.weight)), |n| {
            NodeState::with_capacity(g.capacity(n).unwrap_or(1))
        });
        GreedyMr {
            proto,
            matching: Matching::new(),
            value: 0.0,
            rounds: 0,
        }
    }

    /// True once no live edge remains.
    pub fn is_done(&self) -> bool {
        self.proto.is_empty()
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Residual capacity of a node that still has live edges or took part
    /// in an earlier round.
    pub fn residual(&self, node: NodeId) -> Option<i64> {
        self.proto.nodes().get(&node).map(|s| s.residual)
    }

    /// Runs one round and returns the edges it admitted.
    pub fn step(&mut self, engine: &mut MrEngine) -> Result<Vec<EdgeKey>> {
        self.proto.step(engine, "greedy", |ctx, _| {
            greedy_stage(ctx);
            Ok(())
        })?;
        self.rounds += 1;
        let mut admitted = Vec::new();
        let mut gained = 0.0;
        self.proto.harvest(|e, state| match state {
            EdgeState::InMaximalMatching => {
                admitted.push(e.key);
                gained += e.weight;
                false
            }
            EdgeState::Deleted => false,
            _ => true,
        })?;
        self.matching.extend(admitted.iter().copied());
        self.value += gained;
        Ok(admitted)
    }
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub matching: Matching,
    pub trace: Vec<TracePoint>,
}

impl GreedyOutcome {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }

    pub fn value(&self) -> f64 {
        self.trace.last().map_or(0.0, |p| p.value)
    }
}

/// Runs [`GreedyMr`] until no live edge remains.
pub fn greedy_mr(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    max_rounds: usize,
) -> Result<GreedyOutcome> {
    let mut run = GreedyMr::new(g);
    let mut trace = Vec::new();
    while !run.is_done() {
        if run.rounds() == max_rounds {
            return Err(Error::IterationLimit {
                what: "greedy rounds",
                limit: max_rounds,
            });
        }
        let admitted = run.step(engine)?;
        trace.push(TracePoint {
            round: run.rounds(),
            value: run.value(),
            included_edges: admitted.len(),
        });
    }
    Ok(GreedyOutcome {
        matching: run.matching,
        trace,
    })
}

/// `value / final value` for each trace row; 1.0 throughout when the final
/// value is 0.
pub fn trace_fractions(trace: &[TracePoint]) -> Vec<f64> {
    let last = trace.last().map_or(0.0, |p| p.value);
    trace
        .iter()
        .map(|p| if last > 0.0 { p.value / last } else { 1.0 })
        .collect()
}

/// First round whose value reaches `fraction` of the final value.
pub fn round_reaching(trace: &[TracePoint], fraction: f64) -> Option<usize> {
    trace_fractions(trace)
        .iter()
        .zip(trace)
        .find(|(f, _)| **f >= fraction - 1e-12)
        .map(|(_, p)| p.round)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::triangle;
    use crate::graph::{is_feasible, matching_value};

    #[test]
    fn centralized_on_triangle() {
        let (g, [u, _, z]) = triangle(0.1);
        let m = greedy_centralized(&g);
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![EdgeKey::new(z, u)]);
        assert!((matching_value(&m, &g).unwrap() - 1.1).abs() < 1e-12);
    }

    fn star() -> (BipartiteGraph, Vec<EdgeKey>) {
        let mut g = BipartiteGraph::new();
        let center = g.add_item(1);
        let keys = [3.0, 2.0, 1.0]
            .iter()
            .map(|&w| {
                let leaf = g.add_consumer(1);
                g.add_edge(center, leaf, w).unwrap()
            })
            .collect();
        (g, keys)
    }

    #[test]
    fn single_edge_included_after_one_exchange() {
        let mut g = BipartiteGraph::new();
        let t = g.add_item(1);
        let c = g.add_consumer(1);
        let k = g.add_edge(t, c, 1.0).unwrap();
        let mut engine = MrEngine::new(0, 1);
        let mut run = GreedyMr::new(&g);
        assert!(
            run.step(&mut engine).unwrap().is_empty(),
            "first round only proposes"
        );
        assert_eq!(run.step(&mut engine).unwrap(), vec![k]);
        assert!(run.is_done());
    }

    #[test]
    fn star_admits_heaviest_edge_only() {
        let (g, keys) = star();
        let mut engine = MrEngine::new(0, 1);
        let mut run = GreedyMr::new(&g);
        run.step(&mut engine).unwrap();
        assert_eq!(run.step(&mut engine).unwrap(), vec![keys[0]]);
        assert_eq!(run.residual(NodeId::item(0)), Some(0));
        assert!(run.is_done(), "saturated center retires its other edges");
    }

    #[test]
    fn stalled_round_then_progress() {
        // x - a - b - c - d with weights 0.5, 1, 3, 2 and all capacities 1.
        // a keeps proposing ab until it learns b is saturated, so the round
        // after bc is admitted admits nothing; xa follows one round later.
        let mut g = BipartiteGraph::new();
        let x = g.add_consumer(1);
        let a = g.add_item(1);
        let b = g.add_consumer(1);
        let c = g.add_item(1);
        let d = g.add_consumer(1);
        let xa = g.add_edge(a, x, 0.5).unwrap();
        g.add_edge(a, b, 1.0).unwrap();
        let bc = g.add_edge(c, b, 3.0).unwrap();
        g.add_edge(c, d, 2.0).unwrap();
        let mut engine = MrEngine::new(0, 1);
        let mut run = GreedyMr::new(&g);
        assert!(run.step(&mut engine).unwrap().is_empty());
        assert_eq!(run.step(&mut engine).unwrap(), vec![bc]);
        assert!(run.step(&mut engine).unwrap().is_empty());
        assert_eq!(run.step(&mut engine).unwrap(), vec![xa]);
        assert!(run.is_done());
        assert_eq!(run.matching(), &greedy_centralized(&g));
    }

    #[test]
    fn empty_graph_needs_no_rounds() {
        let mut engine = MrEngine::new(0, 1);
        let out = greedy_mr(&mut engine, &BipartiteGraph::new(), 10).unwrap();
        assert_eq!(out.rounds(), 0);
        assert!(out.matching.is_empty());
    }

    #[test]
    fn worst_case_path_shape() {
        let g = worst_case_path(2, 1.0, 2.0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let w: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1.0, 2.0]);
        assert!(worst_case_path(1, 1.0, 2.0).is_err());
        assert!(worst_case_path(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn path_rounds_and_alternation() {
        let g = worst_case_path(10, 1.0, 1.5).unwrap();
        let mut engine = MrEngine::new(0, 1);
        let out = greedy_mr(&mut engine, &g, 1000).unwrap();
        assert!(out.rounds() >= 5);
        // Centralized greedy takes edges 9, 7, 5, 3, 1 (0-based from the light end).
        let keys: Vec<EdgeKey> = g.edges().iter().map(|e| e.key).collect();
        let expected: Matching = [9, 7, 5, 3, 1].iter().map(|&i| keys[i]).collect();
        assert_eq!(greedy_centralized(&g), expected);
        assert_eq!(out.matching, expected);
    }

    #[test]
    fn trace_is_monotone_and_feasible() {
        let (g, _) = triangle(0.1);
        let mut engine = MrEngine::new(0, 1);
        let mut run = GreedyMr::new(&g);
        let mut last = 0.0;
        while !run.is_done() {
            run.step(&mut engine).unwrap();
            assert!(is_feasible(run.matching(), &g));
            assert!(run.value() >= last);
            last = run.value();
        }
        assert!((last - 1.1).abs() < 1e-12);
    }

    #[test]
    fn fractions_end_at_one() {
        let trace = [
            TracePoint {
                round: 1,
                value: 0.0,
                included_edges: 0,
            },
            TracePoint {
                round: 2,
                value: 3.0,
                included_edges: 1,
            },
            TracePoint {
                round: 3,
                value: 4.0,
                included_edges: 1,
            },
        ];
        assert_eq!(trace_fractions(&trace), vec![0.0, 0.75, 1.0]);
        assert_eq!(round_reaching(&trace, 0.95), Some(3));
        assert_eq!(round_reaching(&trace, 0.5), Some(2));
    }
}
