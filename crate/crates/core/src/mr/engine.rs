//! In-process MapReduce rounds.
//!
//! A round maps every input pair, sorts the intermediate pairs by key and
//! then by value, and reduces each key group in ascending key order. Values
//! are ordered by their `Ord` impl, which acts as the canonical encoding:
//! the output depends only on the input, never on the partition count.

use std::fmt::Debug;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Statistics of one executed round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundLedger {
    pub round_index: usize,
    pub phase_label: String,
    pub emitted_pairs: usize,
    pub active_edges: usize,
}

#[derive(Debug)]
pub struct MrEngine {
    partitions: usize,
    seed: u64,
    ledger: Vec<RoundLedger>,
}

impl MrEngine {
    /// `partitions` only controls how work is split; it never changes results.
    pub fn new(seed: u64, partitions: usize) -> Self {
        MrEngine {
            partitions: partitions.max(1),
            seed,
            ledger: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    /// Index the next executed round will receive.
    pub fn next_round(&self) -> usize {
        self.ledger.len()
    }

    pub fn ledger(&self) -> &[RoundLedger] {
        &self.ledger
    }

    pub fn rounds_since(&self, start: usize) -> &[RoundLedger] {
        &self.ledger[start.min(self.ledger.len())..]
    }

    /// Runs one map/shuffle/reduce round and appends its ledger entry.
    ///
    /// `active_edges` is recorded verbatim; callers pass the size of the
    /// graph view the round operates on.
    pub fn run_round<K1, V1, K2, V2, K3, V3, M, R>(
        &mut self,
        phase: &str,
        active_edges: usize,
        input: Vec<(K1, V1)>,
        mapper: M,
        reducer: R,
    ) -> Result<Vec<(K3, V3)>>
    where
        K1: Debug + Sync,
        V1: Sync,
        K2: Ord + Debug + Send + Sync,
        V2: Ord + Send + Sync,
        K3: Send,
        V3: Send,
        M: Fn(&K1, &V1) -> Result<Vec<(K2, V2)>, String> + Sync,
        R: Fn(&K2, &[V2]) -> Result<Vec<(K3, V3)>, String> + Sync,
    {
        let round = self.next_round();
        let fail = |key: &dyn Debug, message: String| Error::Round {
            round,
            phase: phase.to_string(),
            key: format!("{key:?}"),
            message,
        };

        // Map: contiguous partitions, concatenated in input order.
        let chunk = input.len().div_ceil(self.partitions).max(1);
        let map_chunk = |part: &[(K1, V1)]| -> Result<Vec<(K2, V2)>> {
            let mut out = Vec::new();
            for (k, v) in part {
                out.extend(mapper(k, v).map_err(|m| fail(k, m))?);
            }
            Ok(out)
        };
        let mapped: Vec<Vec<(K2, V2)>> = if self.partitions == 1 {
            vec![map_chunk(&input)?]
        } else {
            input
                .par_chunks(chunk)
                .map(map_chunk)
                .collect::<Result<_>>()?
        };
        let mut pairs: Vec<(K2, V2)> = mapped.into_iter().flatten().collect();
        let emitted = pairs.len();

        // Shuffle.
        if self.partitions == 1 {
            pairs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        } else {
            pairs.par_sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        }
        let mut groups: Vec<(K2, Vec<V2>)> = Vec::new();
        for (k, v) in pairs {
            match groups.last_mut() {
                Some((last, vs)) if *last == k => vs.push(v),
                _ => groups.push((k, vec![v])),
            }
        }

        // Reduce: groups in ascending key order.
        let reduce_chunk = |part: &[(K2, Vec<V2>)]| -> Result<Vec<(K3, V3)>> {
            let mut out = Vec::new();
            for (k, vs) in part {
                out.extend(reducer(k, vs).map_err(|m| fail(k, m))?);
            }
            Ok(out)
        };
        let reduced: Vec<Vec<(K3, V3)>> = if self.partitions == 1 {
            vec![reduce_chunk(&groups)?]
        } else {
            let chunk = groups.len().div_ceil(self.partitions).max(1);
            groups
                .par_chunks(chunk)
                .map(reduce_chunk)
                .collect::<Result<_>>()?
        };

        self.ledger.push(RoundLedger {
            round_index: round,
            phase_label: phase.to_string(),
            emitted_pairs: emitted,
            active_edges,
        });
        Ok(reduced.into_iter().flatten().collect())
    }
}
