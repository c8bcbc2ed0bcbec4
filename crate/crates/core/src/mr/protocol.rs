//! The edge-state protocol every graph algorithm runs on.
//!
//! The graph travels between rounds as one record per edge. Each record
//! holds the two endpoint *halves*: the endpoint's latest view of the edge
//! together with that endpoint's node state. A round maps each record to
//! both endpoints (two pairs per edge), and the reducer at a node unifies
//! the two views of every incident edge, runs the node-local stage logic and
//! writes back its own halves. The two halves of an edge are re-joined into
//! one record before the next round.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{EdgeKey, EdgeState, NodeId, StateFamily};
use crate::mr::engine::MrEngine;
use crate::mr::rng::{keyed_rng, NodeRng};

/// Node-local variables carried on every half an endpoint writes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeState {
    /// Original capacity `b(v)`.
    pub capacity: u32,
    /// Working capacity; its meaning depends on the protocol phase.
    pub residual: i64,
    /// Dual variable `y_v`.
    pub dual: f64,
}

impl NodeState {
    pub fn with_capacity(capacity: u32) -> Self {
        NodeState {
            capacity,
            residual: i64::from(capacity),
            dual: 0.0,
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.capacity
            .cmp(&other.capacity)
            .then(self.residual.cmp(&other.residual))
            .then(self.dual.total_cmp(&other.dual))
    }
}

/// One endpoint's view of an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeView {
    pub state: EdgeState,
    pub layer: Option<u32>,
    /// Dual increment frozen when the edge was pushed.
    pub delta: f64,
    /// Phase-specific marker (overflow, candidate, ...).
    pub flag: bool,
}

impl EdgeView {
    pub fn fresh() -> Self {
        EdgeView {
            state: EdgeState::InGraph,
            layer: None,
            delta: 0.0,
            flag: false,
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.state
            .cmp(&other.state)
            .then(self.layer.cmp(&other.layer))
            .then(self.delta.total_cmp(&other.delta))
            .then(self.flag.cmp(&other.flag))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Half {
    pub view: EdgeView,
    pub node: NodeState,
}

impl Half {
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.view
            .cmp_total(&other.view)
            .then_with(|| self.node.cmp_total(&other.node))
    }
}

/// The per-edge record exchanged between rounds. `ends[0]` belongs to
/// `key.low`, `ends[1]` to `key.high`.
#[derive(Clone, Copy, Debug)]
pub struct EdgeEntry {
    pub key: EdgeKey,
    pub weight: f64,
    pub ends: [Half; 2],
}

impl EdgeEntry {
    pub fn new(key: EdgeKey, weight: f64, low: NodeState, high: NodeState) -> Self {
        EdgeEntry {
            key,
            weight,
            ends: [
                Half {
                    view: EdgeView::fresh(),
                    node: low,
                },
                Half {
                    view: EdgeView::fresh(),
                    node: high,
                },
            ],
        }
    }

    pub fn side_of(&self, node: NodeId) -> usize {
        usize::from(node != self.key.low)
    }

    pub fn unified(&self) -> Result<EdgeState> {
        unify_pair(self.ends[0].view.state, self.ends[1].view.state)
    }

    pub fn set_state(&mut self, state: EdgeState) {
        for h in &mut self.ends {
            h.view.state = state;
        }
    }
}

impl PartialEq for EdgeEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EdgeEntry {}

impl PartialOrd for EdgeEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then(self.weight.total_cmp(&other.weight))
            .then_with(|| self.ends[0].cmp_total(&other.ends[0]))
            .then_with(|| self.ends[1].cmp_total(&other.ends[1]))
    }
}

/// Merges two views of one edge.
///
/// A view still in `InGraph` has not decided anything and yields to the
/// other; when both decided, precedence `D > M > F > K` (maximal-matching
/// states) or `R > I > S` (stack states) applies. Mixing the two families
/// is a protocol violation.
pub fn unify_pair(a: EdgeState, b: EdgeState) -> Result<EdgeState> {
    let (fa, fb) = (a.family(), b.family());
    if fa != fb && fa != StateFamily::Shared && fb != StateFamily::Shared {
        return Err(Error::Protocol(format!(
            "views {a:?} and {b:?} come from different protocol phases"
        )));
    }
    Ok(if a.precedence() >= b.precedence() {
        a
    } else {
        b
    })
}

/// Unifies the diverging views a node received, yielding one state per
/// edge in key order.
pub fn unify_edge_views(
    node: NodeId,
    views: &[(EdgeKey, EdgeState)],
) -> Result<Vec<(EdgeKey, EdgeState)>> {
    let mut grouped: BTreeMap<EdgeKey, Vec<EdgeState>> = BTreeMap::new();
    for &(key, state) in views {
        if !key.touches(node) {
            return Err(Error::Protocol(format!(
                "edge {key} is not incident to {node}"
            )));
        }
        grouped.entry(key).or_default().push(state);
    }
    grouped
        .into_iter()
        .map(|(key, states)| match states.as_slice() {
            [s] => Ok((key, *s)),
            [a, b] => Ok((key, unify_pair(*a, *b)?)),
            _ => Err(Error::Protocol(format!(
                "edge {key} has {} views at {node}",
                states.len()
            ))),
        })
        .collect()
}

/// An incident edge as seen by the reducer at one endpoint.
#[derive(Clone, Debug)]
pub struct Incident {
    pub key: EdgeKey,
    pub weight: f64,
    pub neighbor: NodeId,
    pub unified: EdgeState,
    /// This node's view; stage logic writes here.
    pub own: EdgeView,
    pub other: EdgeView,
    pub other_node: NodeState,
}

/// Everything a node sees during one reduce call.
#[derive(Clone, Debug)]
pub struct NodeCtx {
    pub id: NodeId,
    pub state: NodeState,
    /// Incident edges in key order.
    pub edges: Vec<Incident>,
}

impl NodeCtx {
    fn from_entries(id: NodeId, entries: &[EdgeEntry]) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Protocol(format!("empty group at {id}")))?;
        let state = first.ends[first.side_of(id)].node;
        let views: Vec<(EdgeKey, EdgeState)> = entries
            .iter()
            .flat_map(|e| [(e.key, e.ends[0].view.state), (e.key, e.ends[1].view.state)])
            .collect();
        let unified = unify_edge_views(id, &views)?;
        let mut edges = Vec::with_capacity(entries.len());
        for (e, (key, u)) in entries.iter().zip(unified) {
            debug_assert_eq!(e.key, key);
            let side = e.side_of(id);
            let mine = e.ends[side];
            if mine.node != state {
                return Err(Error::Protocol(format!("inconsistent node state at {id}")));
            }
            edges.push(Incident {
                key,
                weight: e.weight,
                neighbor: key.other(id),
                unified: u,
                own: mine.view,
                other: e.ends[1 - side].view,
                other_node: e.ends[1 - side].node,
            });
        }
        Ok(NodeCtx { id, state, edges })
    }
}

/// Driver for rounds over the edge-state protocol.
#[derive(Clone, Debug, Default)]
pub struct EdgeProtocol {
    records: Vec<EdgeEntry>,
    nodes: BTreeMap<NodeId, NodeState>,
}

impl EdgeProtocol {
    pub fn new(
        edges: impl IntoIterator<Item = (EdgeKey, f64)>,
        mut init: impl FnMut(NodeId) -> NodeState,
    ) -> Self {
        let mut nodes = BTreeMap::new();
        let mut records: Vec<EdgeEntry> = edges
            .into_iter()
            .map(|(key, w)| {
                let low = *nodes.entry(key.low).or_insert_with(|| init(key.low));
                let high = *nodes.entry(key.high).or_insert_with(|| init(key.high));
                EdgeEntry::new(key, w, low, high)
            })
            .collect();
        records.sort_by_key(|e| e.key);
        EdgeProtocol { records, nodes }
    }

    /// Builds a protocol over existing records; node states are read off the
    /// halves.
    pub fn from_records(mut records: Vec<EdgeEntry>) -> Self {
        records.sort_by_key(|e| e.key);
        let mut nodes = BTreeMap::new();
        for e in &records {
            nodes.insert(e.key.low, e.ends[0].node);
            nodes.insert(e.key.high, e.ends[1].node);
        }
        EdgeProtocol { records, nodes }
    }

    pub fn records(&self) -> &[EdgeEntry] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EdgeEntry> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Last known state of every node that ever appeared in a record.
    pub fn nodes(&self) -> &BTreeMap<NodeId, NodeState> {
        &self.nodes
    }

    /// Runs one round: every node unifies its incident views and applies
    /// `stage` with its keyed random stream.
    pub fn step<F>(&mut self, engine: &mut MrEngine, phase: &str, stage: F) -> Result<()>
    where
        F: Fn(&mut NodeCtx, &mut NodeRng) -> Result<(), String> + Sync,
    {
        let round = engine.next_round();
        let seed = engine.seed();
        let input: Vec<(EdgeKey, EdgeEntry)> = self.records.iter().map(|e| (e.key, *e)).collect();
        let active = input.len();
        let output = engine.run_round(
            phase,
            active,
            input,
            |key: &EdgeKey, entry: &EdgeEntry| Ok(vec![(key.low, *entry), (key.high, *entry)]),
            |node: &NodeId, entries: &[EdgeEntry]| {
                let mut ctx = NodeCtx::from_entries(*node, entries).map_err(|e| e.to_string())?;
                let mut rng = keyed_rng(seed, round, *node);
                stage(&mut ctx, &mut rng)?;
                let side_state = ctx.state;
                Ok(ctx
                    .edges
                    .into_iter()
                    .map(|inc| {
                        let side = usize::from(*node != inc.key.low) as u8;
                        (
                            inc.key,
                            (
                                side,
                                inc.weight,
                                Half {
                                    view: inc.own,
                                    node: side_state,
                                },
                            ),
                        )
                    })
                    .collect::<Vec<_>>())
            },
        )?;
        self.rejoin(output)
    }

    fn rejoin(&mut self, halves: Vec<(EdgeKey, (u8, f64, Half))>) -> Result<()> {
        let mut joined: BTreeMap<EdgeKey, (f64, [Option<Half>; 2])> = BTreeMap::new();
        for (key, (side, weight, half)) in halves {
            let node = key.endpoints()[usize::from(side)];
            self.nodes.insert(node, half.node);
            let slot = joined.entry(key).or_insert((weight, [None, None]));
            if slot.1[usize::from(side)].replace(half).is_some() {
                return Err(Error::Protocol(format!("duplicate half for {key}")));
            }
        }
        self.records = joined
            .into_iter()
            .map(|(key, (weight, ends))| match ends {
                [Some(a), Some(b)] => Ok(EdgeEntry {
                    key,
                    weight,
                    ends: [a, b],
                }),
                _ => Err(Error::Protocol(format!("edge {key} lost a half"))),
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Drops records for which `keep` returns false. `keep` receives the
    /// record and its unified state.
    pub fn harvest(&mut self, mut keep: impl FnMut(&EdgeEntry, EdgeState) -> bool) -> Result<()> {
        let mut out = Vec::with_capacity(self.records.len());
        for e in self.records.drain(..) {
            let u = e.unified()?;
            if keep(&e, u) {
                out.push(e);
            }
        }
        self.records = out;
        Ok(())
    }

    /// Rewrites records between rounds (building the next-round view).
    pub fn update(&mut self, f: impl FnMut(&mut EdgeEntry)) {
        self.records.iter_mut().for_each(f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EdgeState::*;

    fn key() -> EdgeKey {
        EdgeKey::bipartite(0, 0)
    }

    #[test]
    fn unify_examples() {
        let n = NodeId::item(0);
        let u = |a, b| unify_edge_views(n, &[(key(), a), (key(), b)]).unwrap()[0].1;
        assert_eq!(u(Marked, InGraph), Marked);
        assert_eq!(u(Selected, Deleted), Deleted);
        assert_eq!(u(InGraph, InGraph), InGraph);
        assert_eq!(u(Removed, InSolution), Removed);
        assert_eq!(u(Stacked, InSolution), InSolution);
        assert_eq!(u(InMaximalMatching, Deleted), Deleted);
    }

    #[test]
    fn unify_rejects_three_views_and_mixed_phases() {
        let n = NodeId::item(0);
        let three = [(key(), InGraph), (key(), Marked), (key(), Marked)];
        assert!(matches!(
            unify_edge_views(n, &three),
            Err(Error::Protocol(_))
        ));
        assert!(unify_pair(Marked, Stacked).is_err());
        let foreign = [(EdgeKey::bipartite(3, 3), InGraph)];
        assert!(unify_edge_views(n, &foreign).is_err());
    }

    #[test]
    fn single_edge_round_emits_two_pairs() {
        let mut engine = MrEngine::new(1, 1);
        let mut proto = EdgeProtocol::new([(key(), 1.0)], |_| NodeState::with_capacity(1));
        proto.step(&mut engine, "noop", |_, _| Ok(())).unwrap();
        assert_eq!(engine.ledger()[0].emitted_pairs, 2);
        assert_eq!(proto.len(), 1);
    }

    #[test]
    fn halves_rejoin_with_node_state() {
        let mut engine = MrEngine::new(1, 2);
        let edges = [
            (EdgeKey::bipartite(0, 0), 1.0),
            (EdgeKey::bipartite(0, 1), 2.0),
        ];
        let mut proto = EdgeProtocol::new(edges, |_| NodeState::with_capacity(2));
        proto
            .step(&mut engine, "mark", |ctx, _| {
                if ctx.id == NodeId::item(0) {
                    ctx.state.residual -= 1;
                    ctx.edges[0].own.state = Marked;
                }
                Ok(())
            })
            .unwrap();
        let r = proto.records();
        assert_eq!(r[0].unified().unwrap(), Marked);
        assert_eq!(r[1].unified().unwrap(), InGraph);
        assert!(r.iter().all(|e| e.ends[0].node.residual == 1));
        assert_eq!(proto.nodes()[&NodeId::item(0)].residual, 1);
        assert_eq!(proto.nodes()[&NodeId::consumer(0)].residual, 2);
    }
}
