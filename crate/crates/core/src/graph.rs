//! Bipartite item/consumer graphs, edge lifecycle states, matchings and the
//! metrics every algorithm is scored with.
//!
//! Items and consumers share one id space through [`NodeId`]'s side tag. An
//! edge is identified by its canonical endpoint pair [`EdgeKey`]; for a
//! bipartite edge that is always `(item, consumer)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance used for every threshold comparison on weights.
pub const REL_TOL: f64 = 1e-9;

/// `value >= threshold` up to a relative tolerance of [`REL_TOL`].
pub fn meets_threshold(value: f64, threshold: f64) -> bool {
    value >= threshold - REL_TOL * threshold.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Item,
    Consumer,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Item => Side::Consumer,
            Side::Consumer => Side::Item,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Item => "item",
            Side::Consumer => "consumer",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "item" | "t" => Ok(Side::Item),
            "consumer" | "c" => Ok(Side::Consumer),
            other => Err(Error::InvalidParameter(format!("unknown side {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub side: Side,
    pub index: u32,
}

impl NodeId {
    pub fn item(index: u32) -> Self {
        NodeId {
            side: Side::Item,
            index,
        }
    }

    pub fn consumer(index: u32) -> Self {
        NodeId {
            side: Side::Consumer,
            index,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Item => write!(f, "t{}", self.index),
            Side::Consumer => write!(f, "c{}", self.index),
        }
    }
}

/// Canonical edge identity: the smaller endpoint first. Items order before
/// consumers, so a bipartite key is `(item, consumer)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub low: NodeId,
    pub high: NodeId,
}

impl EdgeKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            EdgeKey { low: a, high: b }
        } else {
            EdgeKey { low: b, high: a }
        }
    }

    pub fn bipartite(item: u32, consumer: u32) -> Self {
        EdgeKey::new(NodeId::item(item), NodeId::consumer(consumer))
    }

    pub fn endpoints(&self) -> [NodeId; 2] {
        [self.low, self.high]
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.low {
            self.high
        } else {
            self.low
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.low == node || self.high == node
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.low, self.high)
    }
}

/// Shared total order on edges: heavier first, then by canonical key.
pub fn heavier_first(a: (f64, EdgeKey), b: (f64, EdgeKey)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1))
}

/// Lifecycle state of an edge.
///
/// `InGraph`, `Marked`, `Selected`, `Deleted` and `InMaximalMatching` belong
/// to the maximal-matching protocol; `InGraph`, `Stacked`, `Removed` and
/// `InSolution` to the push/pop protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeState {
    InGraph,
    Marked,
    Selected,
    Deleted,
    InMaximalMatching,
    Stacked,
    Removed,
    InSolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateFamily {
    Shared,
    Maximal,
    Stack,
}

impl EdgeState {
    pub fn family(self) -> StateFamily {
        match self {
            EdgeState::InGraph => StateFamily::Shared,
            EdgeState::Marked
            | EdgeState::Selected
            | EdgeState::Deleted
            | EdgeState::InMaximalMatching => StateFamily::Maximal,
            EdgeState::Stacked | EdgeState::Removed | EdgeState::InSolution => StateFamily::Stack,
        }
    }

    /// Tie-break rank when both endpoints decided: D > M > F > K > E and
    /// R > I > S > E.
    pub fn precedence(self) -> u8 {
        match self {
            EdgeState::InGraph => 0,
            EdgeState::Marked => 1,
            EdgeState::Selected => 2,
            EdgeState::InMaximalMatching => 3,
            EdgeState::Deleted => 4,
            EdgeState::Stacked => 1,
            EdgeState::InSolution => 2,
            EdgeState::Removed => 3,
        }
    }

    pub fn letter(self) -> char {
        match self {
            EdgeState::InGraph => 'E',
            EdgeState::Marked => 'K',
            EdgeState::Selected => 'F',
            EdgeState::Deleted => 'D',
            EdgeState::InMaximalMatching => 'M',
            EdgeState::Stacked => 'S',
            EdgeState::Removed => 'R',
            EdgeState::InSolution => 'I',
        }
    }
}

/// An edge with its weight, lifecycle state and (for stacked or included
/// edges) the stack layer it was pushed in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRecord {
    pub key: EdgeKey,
    pub weight: f64,
    pub state: EdgeState,
    pub layer: Option<u32>,
}

impl EdgeRecord {
    pub fn new(key: EdgeKey, weight: f64) -> Self {
        EdgeRecord {
            key,
            weight,
            state: EdgeState::InGraph,
            layer: None,
        }
    }

    pub fn item(&self) -> NodeId {
        self.key.low
    }

    pub fn consumer(&self) -> NodeId {
        self.key.high
    }

    /// Layer is present exactly for stacked and included edges.
    pub fn is_consistent(&self) -> bool {
        let needs_layer = matches!(self.state, EdgeState::Stacked | EdgeState::InSolution);
        self.weight > 0.0 && needs_layer == self.layer.is_some()
    }
}

/// Weighted graph with per-node capacities.
///
/// The public constructors only admit item–consumer edges. Non-bipartite
/// instances exist solely as internal fixtures (see [`crate::fixtures`]).
#[derive(Clone, Debug, Default)]
pub struct BipartiteGraph {
    capacity: BTreeMap<NodeId, u32>,
    labels: BTreeMap<NodeId, String>,
    by_label: BTreeMap<(Side, String), NodeId>,
    edges: Vec<EdgeRecord>,
    index: BTreeMap<EdgeKey, usize>,
    adjacency: BTreeMap<NodeId, Vec<usize>>,
    item_count: u32,
    consumer_count: u32,
}

impl BipartiteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an item with the given capacity (clamped to at least 1).
    pub fn add_item(&mut self, capacity: u32) -> NodeId {
        let id = NodeId::item(self.item_count);
        self.item_count += 1;
        self.insert_node(id, capacity);
        id
    }

    pub fn add_consumer(&mut self, capacity: u32) -> NodeId {
        let id = NodeId::consumer(self.consumer_count);
        self.consumer_count += 1;
        self.insert_node(id, capacity);
        id
    }

    /// Adds a node with an external label, or returns the existing node with
    /// that label on `side` (leaving its capacity untouched).
    pub fn add_labeled(&mut self, side: Side, label: impl Into<String>, capacity: u32) -> NodeId {
        let label = label.into();
        if let Some(&id) = self.by_label.get(&(side, label.clone())) {
            return id;
        }
        let id = match side {
            Side::Item => self.add_item(capacity),
            Side::Consumer => self.add_consumer(capacity),
        };
        self.labels.insert(id, label.clone());
        self.by_label.insert((side, label), id);
        id
    }

    pub fn find_label(&self, side: Side, label: &str) -> Option<NodeId> {
        self.by_label.get(&(side, label.to_string())).copied()
    }

    fn insert_node(&mut self, id: NodeId, capacity: u32) {
        self.capacity.insert(id, capacity.max(1));
        self.adjacency.entry(id).or_default();
    }

    pub fn set_capacity(&mut self, node: NodeId, capacity: u32) -> Result<()> {
        match self.capacity.get_mut(&node) {
            Some(c) => {
                *c = capacity.max(1);
                Ok(())
            }
            None => Err(Error::UnknownNode(node)),
        }
    }

    /// Adds an item–consumer edge. Parallel edges, same-side edges and
    /// non-positive weights are rejected.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, weight: f64) -> Result<EdgeKey> {
        if a.side == b.side {
            return Err(Error::NotBipartite(a, b));
        }
        self.insert_edge(a, b, weight)
    }

    pub(crate) fn insert_edge(&mut self, a: NodeId, b: NodeId, weight: f64) -> Result<EdgeKey> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        for n in [a, b] {
            if !self.capacity.contains_key(&n) {
                return Err(Error::UnknownNode(n));
            }
        }
        let key = EdgeKey::new(a, b);
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight { key, weight });
        }
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateEdge(key));
        }
        let slot = self.edges.len();
        self.edges.push(EdgeRecord::new(key, weight));
        self.index.insert(key, slot);
        self.adjacency.entry(a).or_default().push(slot);
        self.adjacency.entry(b).or_default().push(slot);
        Ok(key)
    }

    pub fn node_count(&self) -> usize {
        self.capacity.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn item_count(&self) -> u32 {
        self.item_count
    }

    pub fn consumer_count(&self) -> u32 {
        self.consumer_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.capacity.keys().copied()
    }

    pub fn capacities(&self) -> &BTreeMap<NodeId, u32> {
        &self.capacity
    }

    pub fn capacity(&self, node: NodeId) -> Result<u32> {
        self.capacity
            .get(&node)
            .copied()
            .ok_or(Error::UnknownNode(node))
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&EdgeRecord> {
        self.index.get(&key).map(|&i| &self.edges[i])
    }

    pub fn weight(&self, key: EdgeKey) -> Result<f64> {
        self.edge(key)
            .map(|e| e.weight)
            .ok_or(Error::UnknownEdge(key))
    }

    pub fn incident(&self, node: NodeId) -> impl Iterator<Item = &EdgeRecord> + '_ {
        self.adjacency
            .get(&node)
            .into_iter()
            .flatten()
            .map(move |&i| &self.edges[i])
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency.get(&node).map_or(0, Vec::len)
    }

    pub fn label(&self, node: NodeId) -> String {
        self.labels
            .get(&node)
            .cloned()
            .unwrap_or_else(|| node.to_string())
    }

    /// True when every edge joins an item to a consumer.
    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|e| e.key.low.side != e.key.high.side)
    }

    pub fn weight_range(&self) -> Option<(f64, f64)> {
        let mut it = self.edges.iter().map(|e| e.weight);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    pub fn total_capacity(&self, side: Side) -> u64 {
        self.capacity
            .iter()
            .filter(|(n, _)| n.side == side)
            .map(|(_, &c)| u64::from(c))
            .sum()
    }
}

/// A set of edges together with per-node degrees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    edges: BTreeSet<EdgeKey>,
    degree: BTreeMap<NodeId, u32>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the edge was already present.
    pub fn insert(&mut self, key: EdgeKey) -> bool {
        if !self.edges.insert(key) {
            return false;
        }
        for n in key.endpoints() {
            *self.degree.entry(n).or_default() += 1;
        }
        true
    }

    pub fn contains(&self, key: EdgeKey) -> bool {
        self.edges.contains(&key)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degree(&self, node: NodeId) -> u32 {
        self.degree.get(&node).copied().unwrap_or(0)
    }

    pub fn extend(&mut self, keys: impl IntoIterator<Item = EdgeKey>) {
        for k in keys {
            self.insert(k);
        }
    }
}

impl FromIterator<EdgeKey> for Matching {
    fn from_iter<I: IntoIterator<Item = EdgeKey>>(iter: I) -> Self {
        let mut m = Matching::new();
        m.extend(iter);
        m
    }
}

/// Total weight of the matched edges.
pub fn matching_value(m: &Matching, g: &BipartiteGraph) -> Result<f64> {
    m.edges().map(|k| g.weight(k)).sum()
}

/// Average relative capacity excess over all nodes of `g`:
/// `(1/|V|) * sum_v max(deg(v) - b(v), 0) / b(v)`.
pub fn violation_metric(m: &Matching, g: &BipartiteGraph) -> Result<f64> {
    if g.node_count() == 0 {
        return Ok(0.0);
    }
    for k in m.edges() {
        g.weight(k)?;
    }
    let total: f64 = g
        .capacities()
        .iter()
        .map(|(&v, &b)| {
            let excess = m.degree(v).saturating_sub(b);
            f64::from(excess) / f64::from(b)
        })
        .sum();
    Ok(total / g.node_count() as f64)
}

pub fn is_feasible(m: &Matching, g: &BipartiteGraph) -> bool {
    m.degree
        .iter()
        .all(|(v, &d)| g.capacity.get(v).is_some_and(|&b| d <= b))
}
