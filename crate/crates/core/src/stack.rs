//! Primal-dual stack algorithms.
//!
//! The push phase repeatedly takes a maximal `⌈εb⌉`-matching of the live
//! edges, pushes it as a stack layer, raises both endpoint duals by the
//! edge's `δ` and drops every live edge that became weakly covered. The pop
//! phase unwinds the stack top-down, admitting layer edges while their
//! endpoints still have capacity.
//!
//! [`stack_mr`] and [`stack_greedy_mr`] may exceed a capacity by at most
//! `⌈εb(v)⌉`; [`stack_mr_feasible`] defers edges that would overflow a node
//! and re-admits them in sublayers, so its output is always feasible.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{meets_threshold, BipartiteGraph, EdgeKey, EdgeState, Matching, NodeId};
use crate::maximal::{maximal_b_matching, MarkingStrategy, DEFAULT_MAX_ITERATIONS};
use crate::mr::engine::MrEngine;
use crate::mr::protocol::{EdgeEntry, EdgeProtocol, EdgeView, Incident, NodeCtx, NodeState};

#[derive(Clone, Copy, Debug)]
pub struct StackParams {
    pub epsilon: f64,
    /// Safety cap on push iterations.
    pub max_push_rounds: usize,
    /// Safety cap on iterations of each maximal-matching call.
    pub max_matching_iterations: usize,
    /// Safety cap on sublayers of the feasible variant.
    pub max_sublayers: usize,
}

impl StackParams {
    pub fn new(epsilon: f64) -> Self {
        StackParams {
            epsilon,
            max_push_rounds: 100_000,
            max_matching_iterations: DEFAULT_MAX_ITERATIONS,
            max_sublayers: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `⌈x·b⌉`, ignoring floating-point noise just above an integer.
pub fn ceil_scaled(x: f64, b: u32) -> u32 {
    let v = x * f64::from(b);
    let r = v.round();
    let out = if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r
    } else {
        v.ceil()
    };
    out.max(0.0) as u32
}

/// Per-layer capacity `⌈εb(v)⌉`; at least 1 for any positive ε.
pub fn layer_capacity(b: u32, epsilon: f64) -> u32 {
    ceil_scaled(epsilon, b).max(1)
}

/// Largest degree the relaxed variants may produce: `⌈(1+ε)b(v)⌉`.
pub fn relaxed_capacity(b: u32, epsilon: f64) -> u32 {
    ceil_scaled(1.0 + epsilon, b)
}

/// `(w − y_u/b(u) − y_v/b(v)) / 2`.
pub fn delta(weight: f64, u: (f64, u32), v: (f64, u32)) -> f64 {
    (weight - cover_sum(u, v)) / 2.0
}

/// `y_u/b(u) + y_v/b(v)`.
pub fn cover_sum(u: (f64, u32), v: (f64, u32)) -> f64 {
    u.0 / f64::from(u.1) + v.0 / f64::from(v.1)
}

/// `y_u/b(u) + y_v/b(v) ≥ w/(3+2ε)` at relative tolerance.
pub fn is_weakly_covered(weight: f64, u: (f64, u32), v: (f64, u32), epsilon: f64) -> bool {
    meets_threshold(cover_sum(u, v), weight / (3.0 + 2.0 * epsilon))
}

type NodeDual = (f64, u32);

/// Dual variable of every node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DualState {
    y: BTreeMap<NodeId, f64>,
}

impl DualState {
    pub fn get(&self, node: NodeId) -> f64 {
        self.y.get(&node).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, node: NodeId, value: f64) {
        self.y.insert(node, value);
    }

    pub fn values(&self) -> &BTreeMap<NodeId, f64> {
        &self.y
    }

    /// Dual objective `Σ_v y_v`.
    pub fn total(&self) -> f64 {
        self.y.values().sum()
    }

    /// `(y, b)` of both endpoints and the edge weight.
    fn pair(&self, g: &BipartiteGraph, key: EdgeKey) -> Result<(NodeDual, NodeDual, f64)> {
        let w = g.weight(key)?;
        let u = (self.get(key.low), g.capacity(key.low)?);
        let v = (self.get(key.high), g.capacity(key.high)?);
        Ok((u, v, w))
    }

    pub fn delta(&self, g: &BipartiteGraph, key: EdgeKey) -> Result<f64> {
        let (u, v, w) = self.pair(g, key)?;
        Ok(delta(w, u, v))
    }

    pub fn is_weakly_covered(
        &self,
        g: &BipartiteGraph,
        key: EdgeKey,
        epsilon: f64,
    ) -> Result<bool> {
        let (u, v, w) = self.pair(g, key)?;
        Ok(is_weakly_covered(w, u, v, epsilon))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StackedEdge {
    pub key: EdgeKey,
    pub weight: f64,
    /// `δ(e)` frozen when the edge was pushed.
    pub delta: f64,
}

/// Layers in push order; the last layer is the top of the stack.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayeredStack {
    layers: Vec<Vec<StackedEdge>>,
}

impl LayeredStack {
    pub fn from_layers(layers: Vec<Vec<StackedEdge>>) -> Self {
        LayeredStack { layers }
    }

    pub fn layers(&self) -> &[Vec<StackedEdge>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Incident edges of `node` in the layer with the most of them.
    pub fn max_layer_incidence(&self, node: NodeId) -> usize {
        self.layers
            .iter()
            .map(|l| l.iter().filter(|e| e.key.touches(node)).count())
            .max()
            .unwrap_or(0)
    }
}

/// A live edge dropped during push, with the cover sum at that moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverEvent {
    pub key: EdgeKey,
    pub weight: f64,
    pub cover_sum: f64,
    pub push_iteration: usize,
}

#[derive(Clone, Debug, Default)]
pub struct PushOutcome {
    pub stack: LayeredStack,
    pub duals: DualState,
    pub cover_events: Vec<CoverEvent>,
    pub iterations: usize,
    pub matching_iterations: usize,
}

#[derive(Clone, Debug, Default)]
pub struct StackStats {
    pub push_iterations: usize,
    pub matching_iterations: usize,
    /// Layers popped (one pop step each).
    pub pop_steps: usize,
    /// Sublayers processed by the feasible variant.
    pub sublayers: usize,
    pub overflow_edges: usize,
    pub mr_rounds: usize,
}

#[derive(Clone, Debug, Default)]
pub struct StackOutcome {
    pub matching: Matching,
    pub push: PushOutcome,
    pub stats: StackStats,
}

fn canonical_pair(ctx: &NodeCtx, inc: &Incident) -> ((f64, u32), (f64, u32)) {
    let me = (ctx.state.dual, ctx.state.capacity);
    let them = (inc.other_node.dual, inc.other_node.capacity);
    if ctx.id == inc.key.low {
        (me, them)
    } else {
        (them, me)
    }
}

fn push_update(ctx: &mut NodeCtx, layer: u32) {
    let mut raise = 0.0;
    let pairs: Vec<_> = ctx
        .edges
        .iter()
        .map(|inc| canonical_pair(ctx, inc))
        .collect();
    for (inc, (u, v)) in ctx.edges.iter_mut().zip(pairs) {
        if !inc.own.flag {
            continue;
        }
        inc.own.flag = false;
        let d = delta(inc.weight, u, v);
        if d > 0.0 {
            inc.own.state = EdgeState::Stacked;
            inc.own.layer = Some(layer);
            inc.own.delta = d;
            raise += d;
        } else {
            inc.own.state = EdgeState::Removed;
        }
    }
    ctx.state.dual += raise;
}

fn push_cover(ctx: &mut NodeCtx, epsilon: f64) {
    let pairs: Vec<_> = ctx
        .edges
        .iter()
        .map(|inc| canonical_pair(ctx, inc))
        .collect();
    for (inc, (u, v)) in ctx.edges.iter_mut().zip(pairs) {
        if is_weakly_covered(inc.weight, u, v, epsilon) {
            inc.own.state = EdgeState::Removed;
        }
    }
}

fn node_state(g: &BipartiteGraph, n: NodeId) -> NodeState {
    NodeState::with_capacity(g.capacity(n).unwrap_or(1))
}

/// Builds the layered stack and the dual state.
pub fn push_phase(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    params: &StackParams,
    strategy: MarkingStrategy,
) -> Result<PushOutcome> {
    params.validate()?;
    let eps = params.epsilon;
    let layer_caps: BTreeMap<NodeId, u32> = g
        .capacities()
        .iter()
        .map(|(&n, &b)| (n, layer_capacity(b, eps)))
        .collect();
    let mut proto = EdgeProtocol::new(g.edges().iter().map(|e| (e.key, e.weight)), |n| {
        node_state(g, n)
    });
    let mut out = PushOutcome::default();

    let cover_event = |e: &EdgeEntry, iteration: usize| CoverEvent {
        key: e.key,
        weight: e.weight,
        cover_sum: cover_sum(
            (e.ends[0].node.dual, e.ends[0].node.capacity),
            (e.ends[1].node.dual, e.ends[1].node.capacity),
        ),
        push_iteration: iteration,
    };

    while !proto.is_empty() {
        if out.iterations == params.max_push_rounds {
            return Err(Error::IterationLimit {
                what: "push phase",
                limit: params.max_push_rounds,
            });
        }
        let iteration = out.iterations;
        let live: Vec<(EdgeKey, f64)> = proto.records().iter().map(|e| (e.key, e.weight)).collect();
        let mm = maximal_b_matching(
            engine,
            &live,
            &layer_caps,
            strategy,
            "push/",
            params.max_matching_iterations,
        )?;
        out.matching_iterations += mm.iterations;
        proto.update(|e| {
            let pushed = mm.matched.contains(e.key);
            for h in &mut e.ends {
                h.view.flag = pushed;
            }
        });

        let layer =
            u32::try_from(iteration).map_err(|_| Error::Protocol("too many layers".into()))?;
        proto.step(engine, "push/update", |ctx, _| {
            push_update(ctx, layer);
            Ok(())
        })?;
        let mut pushed = Vec::new();
        let events = &mut out.cover_events;
        proto.harvest(|e, state| match state {
            EdgeState::Stacked => {
                pushed.push(StackedEdge {
                    key: e.key,
                    weight: e.weight,
                    delta: e.ends[0].view.delta,
                });
                false
            }
            EdgeState::Removed => {
                events.push(cover_event(e, iteration));
                false
            }
            _ => true,
        })?;
        out.stack.layers.push(pushed);

        if !proto.is_empty() {
            proto.step(engine, "push/cover", |ctx, _| {
                push_cover(ctx, eps);
                Ok(())
            })?;
            proto.harvest(|e, state| {
                if state == EdgeState::Removed {
                    events.push(cover_event(e, iteration));
                    false
                } else {
                    true
                }
            })?;
        }
        out.iterations += 1;
    }

    for (&n, s) in proto.nodes() {
        out.duals.set(n, s.dual);
    }
    for n in g.nodes() {
        if !out.duals.y.contains_key(&n) {
            out.duals.set(n, 0.0);
        }
    }
    Ok(out)
}

fn stacked_records(stack: &LayeredStack, g: &BipartiteGraph) -> Vec<EdgeEntry> {
    let mut records = Vec::with_capacity(stack.edge_count());
    for (l, layer) in stack.layers.iter().enumerate() {
        for se in layer {
            let mut e = EdgeEntry::new(
                se.key,
                se.weight,
                node_state(g, se.key.low),
                node_state(g, se.key.high),
            );
            for h in &mut e.ends {
                h.view = EdgeView {
                    state: EdgeState::Stacked,
                    layer: Some(l as u32),
                    delta: se.delta,
                    flag: false,
                };
            }
            records.push(e);
        }
    }
    records
}

fn has_layer(proto: &EdgeProtocol, l: u32) -> bool {
    proto
        .records()
        .iter()
        .any(|e| e.ends[0].view.layer == Some(l))
}

fn remove_others_if_saturated(ctx: &mut NodeCtx, l: u32) {
    if ctx.state.residual <= 0 {
        for inc in &mut ctx.edges {
            if inc.own.layer != Some(l) {
                inc.own.state = EdgeState::Removed;
            }
        }
    }
}

fn pop_relaxed(ctx: &mut NodeCtx, l: u32) {
    let mut included = 0;
    for inc in &mut ctx.edges {
        if inc.own.layer == Some(l) {
            inc.own.state = EdgeState::InSolution;
            included += 1;
        }
    }
    ctx.state.residual -= included;
    remove_others_if_saturated(ctx, l);
}

/// Pops every layer, admitting all of its edges whose endpoints are still
/// present. The result may exceed a capacity by up to `⌈εb(v)⌉`.
pub fn pop_phase(
    engine: &mut MrEngine,
    stack: &LayeredStack,
    g: &BipartiteGraph,
) -> Result<(Matching, usize)> {
    let mut proto = EdgeProtocol::from_records(stacked_records(stack, g));
    let mut matching = Matching::new();
    let mut steps = 0;
    for l in (0..stack.depth() as u32).rev() {
        if !has_layer(&proto, l) {
            continue;
        }
        proto.step(engine, "pop", |ctx, _| {
            pop_relaxed(ctx, l);
            Ok(())
        })?;
        steps += 1;
        proto.harvest(|e, state| match state {
            EdgeState::InSolution => {
                matching.insert(e.key);
                false
            }
            EdgeState::Removed => false,
            _ => true,
        })?;
    }
    Ok((matching, steps))
}

fn pop_tentative(ctx: &mut NodeCtx, l: u32) {
    let in_layer = ctx.edges.iter().filter(|i| i.own.layer == Some(l)).count();
    if in_layer as i64 > ctx.state.residual {
        for inc in &mut ctx.edges {
            if inc.own.layer == Some(l) {
                inc.own.flag = true;
            } else {
                inc.own.state = EdgeState::Removed;
            }
        }
    }
}

fn pop_commit(ctx: &mut NodeCtx, l: u32) {
    let mut included = 0;
    for inc in &mut ctx.edges {
        if inc.own.layer == Some(l) && !inc.own.flag && !inc.other.flag {
            inc.own.state = EdgeState::InSolution;
            included += 1;
        }
    }
    ctx.state.residual -= included;
    remove_others_if_saturated(ctx, l);
}

fn feasible_filter(ctx: &mut NodeCtx, epsilon: f64) {
    if ctx.state.residual <= 0 {
        for inc in &mut ctx.edges {
            inc.own.state = EdgeState::Removed;
        }
        return;
    }
    let deltas: Vec<f64> = ctx.edges.iter().map(|i| i.own.delta).collect();
    for (j, inc) in ctx.edges.iter_mut().enumerate() {
        let bar = (1.0 + epsilon) * inc.own.delta;
        inc.own.flag = deltas.iter().enumerate().any(|(k, &d)| k != j && d > bar);
    }
}

fn feasible_include(ctx: &mut NodeCtx) -> Result<(), String> {
    let chosen = ctx.edges.iter().filter(|i| i.own.flag).count() as i64;
    if chosen > ctx.state.residual {
        return Err(format!(
            "sublayer has {chosen} edges at a node with residual {}",
            ctx.state.residual
        ));
    }
    for inc in &mut ctx.edges {
        if inc.own.flag {
            inc.own.state = EdgeState::InSolution;
        }
    }
    ctx.state.residual -= chosen;
    if ctx.state.residual <= 0 {
        for inc in &mut ctx.edges {
            if !inc.own.flag {
                inc.own.state = EdgeState::Removed;
            }
        }
    }
    Ok(())
}

/// Pop phase that never exceeds a capacity, followed by the sublayer loop
/// that re-admits overflow edges. Returns the matching, pop steps and
/// sublayer count.
pub fn pop_feasible(
    engine: &mut MrEngine,
    stack: &LayeredStack,
    g: &BipartiteGraph,
    params: &StackParams,
) -> Result<(Matching, StackStats)> {
    params.validate()?;
    let mut stats = StackStats::default();
    let mut proto = EdgeProtocol::from_records(stacked_records(stack, g));
    let mut matching = Matching::new();
    let mut overflow: Vec<EdgeEntry> = Vec::new();

    for l in (0..stack.depth() as u32).rev() {
        if !has_layer(&proto, l) {
            continue;
        }
        proto.step(engine, "pop/tentative", |ctx, _| {
            pop_tentative(ctx, l);
            Ok(())
        })?;
        proto.step(engine, "pop/commit", |ctx, _| {
            pop_commit(ctx, l);
            Ok(())
        })?;
        stats.pop_steps += 1;
        proto.harvest(|e, state| match state {
            EdgeState::InSolution => {
                matching.insert(e.key);
                false
            }
            EdgeState::Removed => false,
            _ if e.ends[0].view.layer == Some(l) => {
                overflow.push(*e);
                false
            }
            _ => true,
        })?;
    }
    stats.overflow_edges = overflow.len();

    // Residual capacity after popping.
    let mut residual: BTreeMap<NodeId, i64> = g
        .capacities()
        .iter()
        .map(|(&n, &b)| (n, i64::from(b)))
        .collect();
    for (&n, s) in proto.nodes() {
        residual.insert(n, s.residual);
    }
    for e in &mut overflow {
        for (side, n) in e.key.endpoints().into_iter().enumerate() {
            e.ends[side].node.residual = residual[&n];
            e.ends[side].view.flag = false;
        }
    }

    let mut proto = EdgeProtocol::from_records(overflow);
    let eps = params.epsilon;
    while !proto.is_empty() {
        if stats.sublayers == params.max_sublayers {
            return Err(Error::IterationLimit {
                what: "overflow sublayers",
                limit: params.max_sublayers,
            });
        }
        proto.step(engine, "feasible/filter", |ctx, _| {
            feasible_filter(ctx, eps);
            Ok(())
        })?;
        proto.harvest(|_, state| state != EdgeState::Removed)?;
        if proto.is_empty() {
            break;
        }
        stats.sublayers += 1;
        let candidates: Vec<(EdgeKey, f64)> = proto
            .records()
            .iter()
            .filter(|e| !e.ends[0].view.flag && !e.ends[1].view.flag)
            .map(|e| (e.key, e.weight))
            .collect();
        let caps: BTreeMap<NodeId, u32> = proto
            .nodes()
            .iter()
            .map(|(&n, s)| (n, u32::try_from(s.residual.max(0)).unwrap_or(0)))
            .collect();
        let mm = maximal_b_matching(
            engine,
            &candidates,
            &caps,
            MarkingStrategy::Random,
            "feasible/",
            params.max_matching_iterations,
        )?;
        stats.matching_iterations += mm.iterations;
        proto.update(|e| {
            let chosen = mm.matched.contains(e.key);
            for h in &mut e.ends {
                h.view.flag = chosen;
            }
        });
        proto.step(engine, "feasible/include", |ctx, _| feasible_include(ctx))?;
        proto.harvest(|e, state| match state {
            EdgeState::InSolution => {
                matching.insert(e.key);
                false
            }
            EdgeState::Removed => false,
            _ => true,
        })?;
    }
    Ok((matching, stats))
}

fn run(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    params: &StackParams,
    strategy: MarkingStrategy,
    feasible: bool,
) -> Result<StackOutcome> {
    let start = engine.next_round();
    let push = push_phase(engine, g, params, strategy)?;
    let (matching, mut stats) = if feasible {
        pop_feasible(engine, &push.stack, g, params)?
    } else {
        let (m, steps) = pop_phase(engine, &push.stack, g)?;
        (
            m,
            StackStats {
                pop_steps: steps,
                ..StackStats::default()
            },
        )
    };
    stats.push_iterations = push.iterations;
    stats.matching_iterations += push.matching_iterations;
    stats.mr_rounds = engine.next_round() - start;
    Ok(StackOutcome {
        matching,
        push,
        stats,
    })
}

/// Stack algorithm with uniformly random marking; may exceed capacities by
/// a factor of at most `1 + ε`.
pub fn stack_mr(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    params: &StackParams,
) -> Result<StackOutcome> {
    run(engine, g, params, MarkingStrategy::Random, false)
}

/// [`stack_mr`] with nodes marking their heaviest live edges.
pub fn stack_greedy_mr(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    params: &StackParams,
) -> Result<StackOutcome> {
    run(engine, g, params, MarkingStrategy::Heaviest, false)
}

/// Stack algorithm whose output always respects every capacity.
pub fn stack_mr_feasible(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    params: &StackParams,
) -> Result<StackOutcome> {
    run(engine, g, params, MarkingStrategy::Random, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::triangle;
    use crate::graph::{is_feasible, matching_value};

    #[test]
    fn delta_examples() {
        assert_eq!(delta(1.0, (0.0, 1), (0.0, 1)), 0.5);
        assert_eq!(delta(10.0, (2.0, 1), (3.0, 3)), 3.5);
        assert_eq!(delta(3.0, (2.0, 2), (4.0, 2)), 0.0);
    }

    #[test]
    fn weak_cover_examples() {
        assert!(!is_weakly_covered(1.0, (0.0, 1), (0.0, 1), 0.5));
        assert!(is_weakly_covered(4.0, (0.5, 1), (1.0, 2), 0.5));
        assert!(!is_weakly_covered(4.0, (0.5, 1), (0.9, 2), 0.5));
        for eps in [0.01, 0.5, 1.0, 10.0] {
            let w = 3.0;
            assert!(is_weakly_covered(w, (w / 2.0, 1), (w / 2.0, 1), eps));
        }
    }

    #[test]
    fn ceilings_ignore_rounding_noise() {
        assert_eq!(layer_capacity(10, 0.7), 7);
        assert_eq!(layer_capacity(1, 0.01), 1);
        assert_eq!(layer_capacity(3, 0.5), 2);
        assert_eq!(relaxed_capacity(3, 0.5), 5);
        assert_eq!(relaxed_capacity(10, 0.1), 11);
    }

    fn single_edge() -> BipartiteGraph {
        let mut g = BipartiteGraph::new();
        let t = g.add_item(1);
        let c = g.add_consumer(1);
        g.add_edge(t, c, 2.0).unwrap();
        g
    }

    #[test]
    fn single_edge_push_and_pop() {
        let g = single_edge();
        let mut engine = MrEngine::new(5, 1);
        let out = stack_mr(&mut engine, &g, &StackParams::new(1.0)).unwrap();
        assert_eq!(out.push.stack.depth(), 1);
        assert_eq!(out.push.stack.layers()[0].len(), 1);
        assert_eq!(out.push.iterations, 1);
        assert_eq!(out.matching.len(), 1);
        assert_eq!(out.push.duals.get(NodeId::item(0)), 1.0);
    }

    #[test]
    fn empty_graph() {
        let mut engine = MrEngine::new(5, 1);
        let out = stack_mr(&mut engine, &BipartiteGraph::new(), &StackParams::new(0.5)).unwrap();
        assert!(out.matching.is_empty());
        assert_eq!(engine.ledger().len(), 0);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let mut engine = MrEngine::new(5, 1);
        for eps in [0.0, -1.0, f64::NAN] {
            let err = stack_mr(&mut engine, &single_edge(), &StackParams::new(eps)).unwrap_err();
            assert!(matches!(err, Error::InvalidParameter(_)));
        }
    }

    fn path_stack() -> (BipartiteGraph, LayeredStack) {
        // u - v - w with b(v) = 1, both edges in one layer.
        let mut g = BipartiteGraph::new();
        let u = g.add_item(1);
        let v = g.add_consumer(1);
        let w = g.add_item(1);
        let a = g.add_edge(u, v, 1.0).unwrap();
        let b = g.add_edge(w, v, 1.0).unwrap();
        let layer = vec![
            StackedEdge {
                key: a,
                weight: 1.0,
                delta: 0.5,
            },
            StackedEdge {
                key: b,
                weight: 1.0,
                delta: 0.5,
            },
        ];
        (g, LayeredStack::from_layers(vec![layer]))
    }

    #[test]
    fn relaxed_pop_admits_whole_top_layer() {
        let (g, stack) = path_stack();
        let mut engine = MrEngine::new(0, 1);
        let (m, steps) = pop_phase(&mut engine, &stack, &g).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(steps, 1);
        assert_eq!(m.degree(NodeId::consumer(0)), 2);
        assert!(m.degree(NodeId::consumer(0)) <= relaxed_capacity(1, 1.0));
    }

    #[test]
    fn feasible_pop_keeps_exactly_one_overflow_edge() {
        let (g, stack) = path_stack();
        for seed in 0..20 {
            let mut engine = MrEngine::new(seed, 1);
            let (m, stats) = pop_feasible(&mut engine, &stack, &g, &StackParams::new(1.0)).unwrap();
            assert_eq!(m.len(), 1);
            assert_eq!(stats.overflow_edges, 2);
            assert_eq!(stats.sublayers, 1);
            assert!(is_feasible(&m, &g));
        }
    }

    #[test]
    fn lower_layers_respect_saturation() {
        // Top layer fills v; the lower-layer edge at v must be dropped.
        let (g, _) = path_stack();
        let keys: Vec<EdgeKey> = g.edges().iter().map(|e| e.key).collect();
        let stack = LayeredStack::from_layers(vec![
            vec![StackedEdge {
                key: keys[1],
                weight: 1.0,
                delta: 0.5,
            }],
            vec![StackedEdge {
                key: keys[0],
                weight: 1.0,
                delta: 0.5,
            }],
        ]);
        let mut engine = MrEngine::new(0, 1);
        let (m, steps) = pop_phase(&mut engine, &stack, &g).unwrap();
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![keys[0]]);
        assert_eq!(steps, 1, "the emptied bottom layer needs no round");
    }

    #[test]
    fn triangle_meets_guarantee() {
        let (g, _) = triangle(0.1);
        for eps in [0.25, 0.5, 1.0] {
            for seed in 0..20 {
                let mut engine = MrEngine::new(seed, 1);
                let out = stack_mr(&mut engine, &g, &StackParams::new(eps)).unwrap();
                let value = matching_value(&out.matching, &g).unwrap();
                assert!(value >= 2.0 / (6.0 + eps) - 1e-9);
            }
        }
    }

    #[test]
    fn duals_never_decrease_and_start_at_zero() {
        let (g, _) = triangle(0.1);
        let mut engine = MrEngine::new(1, 1);
        let out = push_phase(
            &mut engine,
            &g,
            &StackParams::new(0.5),
            MarkingStrategy::Random,
        )
        .unwrap();
        assert!(out.duals.values().values().all(|&y| y >= 0.0));
        for ev in &out.cover_events {
            assert!(meets_threshold(ev.cover_sum, ev.weight / 4.0));
        }
    }
}
