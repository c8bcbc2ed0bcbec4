//! Randomized maximal b-matching in four rounds per iteration.
//!
//! Each iteration runs mark, select, match and cleanup rounds over the live
//! edges. A node with residual capacity `r` marks `⌈r/2⌉` incident edges,
//! selects up to `max(⌊r/2⌋, 1)` of the edges its neighbours marked, drops
//! random selected edges beyond `r`, and finally commits the survivors and
//! retires itself once saturated.

use std::collections::BTreeMap;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::graph::{heavier_first, BipartiteGraph, EdgeKey, EdgeState, Matching, NodeId};
use crate::mr::engine::MrEngine;
use crate::mr::protocol::{EdgeProtocol, NodeCtx, NodeState};
use crate::mr::rng::NodeRng;

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// How a node picks the edges it marks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkingStrategy {
    /// Uniformly at random without replacement.
    Random,
    /// The heaviest live edges, ties by edge key.
    Heaviest,
}

#[derive(Clone, Debug, Default)]
pub struct MaximalOutcome {
    pub matched: Matching,
    pub iterations: usize,
    /// Capacity left at every node that appeared in the input.
    pub residual: BTreeMap<NodeId, u32>,
}

fn live(ctx: &NodeCtx) -> impl Iterator<Item = usize> + '_ {
    ctx.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            e.unified != EdgeState::Deleted && e.unified != EdgeState::InMaximalMatching
        })
        .map(|(i, _)| i)
}

fn residual(ctx: &NodeCtx) -> usize {
    usize::try_from(ctx.state.residual.max(0)).unwrap_or(usize::MAX)
}

/// Marks `min(⌈r/2⌉, live degree)` incident edges.
pub fn mark_stage(ctx: &mut NodeCtx, rng: &mut NodeRng, strategy: MarkingStrategy) {
    let candidates: Vec<usize> = live(ctx).collect();
    let budget = residual(ctx).div_ceil(2).min(candidates.len());
    if budget == 0 {
        return;
    }
    let chosen: Vec<usize> = match strategy {
        MarkingStrategy::Random => sample(rng, candidates.len(), budget)
            .into_iter()
            .map(|i| candidates[i])
            .collect(),
        MarkingStrategy::Heaviest => {
            let mut by_weight = candidates;
            by_weight.sort_by(|&a, &b| {
                heavier_first(
                    (ctx.edges[a].weight, ctx.edges[a].key),
                    (ctx.edges[b].weight, ctx.edges[b].key),
                )
            });
            by_weight.truncate(budget);
            by_weight
        }
    };
    for i in chosen {
        ctx.edges[i].own.state = EdgeState::Marked;
    }
}

/// Selects up to `max(⌊r/2⌋, 1)` edges among those the other endpoint marked.
pub fn select_stage(ctx: &mut NodeCtx, rng: &mut NodeRng) {
    if residual(ctx) == 0 {
        return;
    }
    let candidates: Vec<usize> = ctx
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.other.state == EdgeState::Marked)
        .map(|(i, _)| i)
        .collect();
    let budget = (residual(ctx) / 2).max(1).min(candidates.len());
    for i in sample(rng, candidates.len(), budget) {
        ctx.edges[candidates[i]].own.state = EdgeState::Selected;
    }
}

/// Deletes random selected edges until at most `r` remain at this node.
pub fn match_stage(ctx: &mut NodeCtx, rng: &mut NodeRng) {
    let selected: Vec<usize> = ctx
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.unified == EdgeState::Selected)
        .map(|(i, _)| i)
        .collect();
    let r = residual(ctx);
    if selected.len() <= r {
        return;
    }
    for i in sample(rng, selected.len(), selected.len() - r) {
        ctx.edges[selected[i]].own.state = EdgeState::Deleted;
    }
}

/// Commits surviving selected edges, lowers the residual and deletes the
/// remaining edges of saturated nodes. Everything else returns to `InGraph`.
pub fn cleanup_stage(ctx: &mut NodeCtx) {
    let mut matched = 0;
    for e in &mut ctx.edges {
        if e.unified == EdgeState::Selected {
            e.own.state = EdgeState::InMaximalMatching;
            matched += 1;
        } else {
            e.own.state = EdgeState::InGraph;
        }
    }
    ctx.state.residual -= matched;
    if ctx.state.residual <= 0 {
        for e in &mut ctx.edges {
            if e.own.state == EdgeState::InGraph {
                e.own.state = EdgeState::Deleted;
            }
        }
    }
}

/// Computes a maximal b-matching of `edges` under `caps`.
///
/// Edges touching a node with capacity 0 (or missing from `caps`) are
/// excluded up front. Phase labels are `{prefix}mm-mark` etc.
pub fn maximal_b_matching(
    engine: &mut MrEngine,
    edges: &[(EdgeKey, f64)],
    caps: &BTreeMap<NodeId, u32>,
    strategy: MarkingStrategy,
    prefix: &str,
    max_iterations: usize,
) -> Result<MaximalOutcome> {
    let cap = |n: NodeId| caps.get(&n).copied().unwrap_or(0);
    let mut outcome = MaximalOutcome::default();
    for (k, _) in edges {
        for n in k.endpoints() {
            outcome.residual.insert(n, cap(n));
        }
    }
    let usable = edges
        .iter()
        .filter(|(k, _)| cap(k.low) > 0 && cap(k.high) > 0)
        .copied();
    let mut proto = EdgeProtocol::new(usable, |n| NodeState::with_capacity(cap(n)));
    let labels = ["mm-mark", "mm-select", "mm-match", "mm-cleanup"].map(|s| format!("{prefix}{s}"));

    while !proto.is_empty() {
        if outcome.iterations == max_iterations {
            return Err(Error::IterationLimit {
                what: "maximal b-matching",
                limit: max_iterations,
            });
        }
        outcome.iterations += 1;
        proto.step(engine, &labels[0], |ctx, rng| {
            mark_stage(ctx, rng, strategy);
            Ok(())
        })?;
        proto.step(engine, &labels[1], |ctx, rng| {
            select_stage(ctx, rng);
            Ok(())
        })?;
        proto.step(engine, &labels[2], |ctx, rng| {
            match_stage(ctx, rng);
            Ok(())
        })?;
        proto.step(engine, &labels[3], |ctx, _| {
            cleanup_stage(ctx);
            Ok(())
        })?;
        let matched = &mut outcome.matched;
        proto.harvest(|e, state| match state {
            EdgeState::InMaximalMatching => {
                matched.insert(e.key);
                false
            }
            EdgeState::Deleted => false,
            _ => true,
        })?;
    }
    for (n, s) in proto.nodes() {
        outcome
            .residual
            .insert(*n, u32::try_from(s.residual.max(0)).unwrap_or(0));
    }
    Ok(outcome)
}

/// Maximal b-matching of a whole graph under its own capacities.
pub fn maximal_matching_of(
    engine: &mut MrEngine,
    g: &BipartiteGraph,
    strategy: MarkingStrategy,
    max_iterations: usize,
) -> Result<MaximalOutcome> {
    let edges: Vec<(EdgeKey, f64)> = g.edges().iter().map(|e| (e.key, e.weight)).collect();
    maximal_b_matching(
        engine,
        &edges,
        g.capacities(),
        strategy,
        "maximal/",
        max_iterations,
    )
}
