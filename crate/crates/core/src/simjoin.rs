//! Sparse term vectors, tf-idf weighting and the thresholded item/consumer
//! similarity join.
//!
//! [`candidate_edges`] indexes only a prefix of every item vector. Terms are
//! ranked by decreasing document frequency (ties by term id) and an item's
//! prefix is the shortest head whose remaining tail cannot reach the
//! threshold against any consumer: `Σ_tail w(t) · max_c w_c(t) < σ`. Any
//! pair at or above the threshold therefore shares an indexed term. Every
//! candidate is verified with a full dot product.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{meets_threshold, EdgeKey, EdgeRecord, Side};
use crate::mr::engine::MrEngine;

/// Sparse vector sorted by term id, without zero entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(u32, f64)>,
}

impl TermVector {
    /// Sums duplicate terms and drops zero weights.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (t, w) in entries {
            *acc.entry(t).or_default() += w;
        }
        TermVector {
            entries: acc.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, term: u32) -> Option<f64> {
        self.entries
            .binary_search_by_key(&term, |&(t, _)| t)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn contains(&self, term: u32) -> bool {
        self.get(term).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub side: Side,
    pub vector: TermVector,
}

/// Documents of both sides over one term dictionary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    dictionary: BTreeMap<String, u32>,
    terms: Vec<String>,
    ids: BTreeSet<(Side, String)>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.dictionary.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.dictionary.insert(term.to_string(), id);
        id
    }

    /// Adds a document from raw term counts. Document ids must be unique
    /// within a side.
    pub fn add_document<S: AsRef<str>>(
        &mut self,
        id: impl Into<String>,
        side: Side,
        counts: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<()> {
        let id = id.into();
        if !self.ids.insert((side, id.clone())) {
            return Err(Error::InvalidParameter(format!(
                "duplicate {} document {id:?}",
                side.as_str()
            )));
        }
        let entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(t, c)| (self.intern(t.as_ref()), c))
            .collect();
        self.documents.push(Document {
            id,
            side,
            vector: TermVector::from_entries(entries),
        });
        Ok(())
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = &Document> + '_ {
        self.documents.iter().filter(move |d| d.side == side)
    }

    pub fn vectors(&self, side: Side) -> Vec<TermVector> {
        self.side(side).map(|d| d.vector.clone()).collect()
    }

    pub fn ids(&self, side: Side) -> Vec<String> {
        self.side(side).map(|d| d.id.clone()).collect()
    }

    pub fn dictionary(&self) -> &BTreeMap<String, u32> {
        &self.dictionary
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Replaces raw counts by `count · ln(N / df)` over all documents of both
/// sides. Terms present in every document vanish.
pub fn tfidf_weight(corpus: &Corpus) -> Result<Corpus> {
    if corpus.is_empty() {
        return Err(Error::InvalidParameter(
            "tf-idf needs at least one document".into(),
        ));
    }
    let mut df: BTreeMap<u32, usize> = BTreeMap::new();
    for d in &corpus.documents {
        for &(t, _) in d.vector.entries() {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = corpus.len() as f64;
    let mut out = corpus.clone();
    for d in &mut out.documents {
        d.vector = TermVector::from_entries(
            d.vector
                .entries()
                .iter()
                .map(|&(t, c)| (t, c * (n / df[&t] as f64).ln())),
        );
    }
    Ok(out)
}

pub fn dot_similarity(a: &TermVector, b: &TermVector) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    let (x, y) = (a.entries(), b.entries());
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += x[i].1 * y[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )))
    }
}

fn edge(i: usize, j: usize, w: f64) -> EdgeRecord {
    EdgeRecord::new(EdgeKey::bipartite(i as u32, j as u32), w)
}

/// All pairs by brute force; edges in key order.
pub fn naive_join(
    items: &[TermVector],
    consumers: &[TermVector],
    sigma: f64,
) -> Result<Vec<EdgeRecord>> {
    check_sigma(sigma)?;
    let mut out = Vec::new();
    for (i, a) in items.iter().enumerate() {
        for (j, b) in consumers.iter().enumerate() {
            let s = dot_similarity(a, b);
            if s > 0.0 && meets_threshold(s, sigma) {
                out.push(edge(i, j, s));
            }
        }
    }
    Ok(out)
}

/// Global term ranking used for prefixes: decreasing document frequency,
/// ties by term id.
#[derive(Clone, Debug)]
pub struct TermOrder {
    rank: BTreeMap<u32, usize>,
}

impl TermOrder {
    pub fn from_vectors<'a>(docs: impl IntoIterator<Item = &'a TermVector>) -> Self {
        let mut df: BTreeMap<u32, usize> = BTreeMap::new();
        for d in docs {
            for &(t, _) in d.entries() {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut terms: Vec<(u32, usize)> = df.into_iter().collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        TermOrder {
            rank: terms
                .into_iter()
                .enumerate()
                .map(|(r, (t, _))| (t, r))
                .collect(),
        }
    }

    pub fn rank(&self, term: u32) -> usize {
        self.rank.get(&term).copied().unwrap_or(usize::MAX)
    }

    /// The vector's entries in rank order.
    pub fn sorted(&self, v: &TermVector) -> Vec<(u32, f64)> {
        let mut e = v.entries().to_vec();
        e.sort_by_key(|&(t, _)| (self.rank(t), t));
        e
    }
}

/// Largest weight of every term over a set of vectors.
pub fn max_weights<'a>(docs: impl IntoIterator<Item = &'a TermVector>) -> BTreeMap<u32, f64> {
    let mut m: BTreeMap<u32, f64> = BTreeMap::new();
    for d in docs {
        for &(t, w) in d.entries() {
            let e = m.entry(t).or_insert(0.0);
            *e = e.max(w);
        }
    }
    m
}

/// Number of leading entries of `sorted` that must be indexed so that the
/// tail cannot reach `sigma` against vectors bounded by `max_opposite`.
pub fn prefix_length(
    sorted: &[(u32, f64)],
    max_opposite: &BTreeMap<u32, f64>,
    sigma: f64,
) -> usize {
    // Slightly below sigma so rounding in the bound never drops a pair that
    // the verification tolerance would accept.
    let bound = sigma * (1.0 - 1e-6);
    let mut tail = 0.0;
    let mut p = sorted.len();
    while p > 0 {
        let (t, w) = sorted[p - 1];
        let next = tail + w * max_opposite.get(&t).copied().unwrap_or(0.0);
        if next >= bound {
            break;
        }
        tail = next;
        p -= 1;
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Probe {
    Item(u32),
    Consumer(u32),
}

#[derive(Debug)]
enum JoinInput {
    Postings(Vec<u32>),
    Query,
}

/// Exact thresholded join in two rounds: index item prefixes, then probe
/// with every consumer term and verify. Edges are returned in key order,
/// with items and consumers numbered by their slice positions.
pub fn candidate_edges(
    engine: &mut MrEngine,
    items: &[TermVector],
    consumers: &[TermVector],
    sigma: f64,
) -> Result<Vec<EdgeRecord>> {
    check_sigma(sigma)?;
    let order = TermOrder::from_vectors(items.iter().chain(consumers));
    let max_consumer = max_weights(consumers);
    let prefixes: Vec<Vec<u32>> = items
        .iter()
        .map(|v| {
            let sorted = order.sorted(v);
            let p = prefix_length(&sorted, &max_consumer, sigma);
            sorted[..p].iter().map(|&(t, _)| t).collect()
        })
        .collect();
    let docs = items.len() + consumers.len();

    let input: Vec<(u32, ())> = (0..items.len() as u32).map(|i| (i, ())).collect();
    let postings = engine.run_round(
        "simjoin/index",
        docs,
        input,
        |&i: &u32, _| Ok(prefixes[i as usize].iter().map(|&t| (t, i)).collect()),
        |&t: &u32, list: &[u32]| Ok(vec![(t, JoinInput::Postings(list.to_vec()))]),
    )?;

    let mut input = postings;
    input.extend((0..consumers.len() as u32).map(|j| (j, JoinInput::Query)));
    let matches = engine.run_round(
        "simjoin/verify",
        docs,
        input,
        |&k: &u32, v: &JoinInput| {
            Ok(match v {
                JoinInput::Postings(list) => list.iter().map(|&i| (k, Probe::Item(i))).collect(),
                JoinInput::Query => consumers[k as usize]
                    .entries()
                    .iter()
                    .map(|&(t, _)| (t, Probe::Consumer(k)))
                    .collect(),
            })
        },
        |&t: &u32, probes: &[Probe]| {
            let mut found = Vec::new();
            let split = probes.partition_point(|p| matches!(p, Probe::Item(_)));
            for p in &probes[..split] {
                let Probe::Item(i) = *p else { continue };
                for q in &probes[split..] {
                    let Probe::Consumer(j) = *q else { continue };
                    let c = &consumers[j as usize];
                    // Each pair is verified only at its first shared prefix term.
                    let first = prefixes[i as usize].iter().find(|&&pt| c.contains(pt));
                    if first != Some(&t) {
                        continue;
                    }
                    let s = dot_similarity(&items[i as usize], c);
                    if s > 0.0 && meets_threshold(s, sigma) {
                        found.push(((i, j), s));
                    }
                }
            }
            Ok(found)
        },
    )?;

    let mut out: Vec<EdgeRecord> = matches
        .into_iter()
        .map(|((i, j), s)| edge(i as usize, j as usize, s))
        .collect();
    out.sort_by_key(|e| e.key);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(e: &[(u32, f64)]) -> TermVector {
        TermVector::from_entries(e.iter().copied())
    }

    #[test]
    fn tfidf_examples() {
        let mut c = Corpus::new();
        c.add_document("a", Side::Item, [("x", 2.0), ("y", 1.0)])
            .unwrap();
        assert!(tfidf_weight(&c).unwrap().documents()[0].vector.is_empty());

        let mut c = Corpus::new();
        c.add_document("a", Side::Item, [("x", 3.0)]).unwrap();
        c.add_document("b", Side::Consumer, [("y", 1.0)]).unwrap();
        let w = tfidf_weight(&c).unwrap();
        let x = w.dictionary()["x"];
        assert!((w.documents()[0].vector.get(x).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);

        let mut c = Corpus::new();
        c.add_document("a", Side::Item, [("x", 2.0)]).unwrap();
        c.add_document("b", Side::Item, [("x", 1.0)]).unwrap();
        c.add_document("c", Side::Consumer, [("y", 1.0)]).unwrap();
        c.add_document("d", Side::Consumer, [("y", 1.0)]).unwrap();
        let w = tfidf_weight(&c).unwrap();
        let x = w.dictionary()["x"];
        assert!((w.documents()[0].vector.get(x).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);

        assert!(tfidf_weight(&Corpus::new()).is_err());
    }

    #[test]
    fn duplicate_ids_rejected_per_side() {
        let mut c = Corpus::new();
        c.add_document("a", Side::Item, [("x", 1.0)]).unwrap();
        c.add_document("a", Side::Consumer, [("x", 1.0)]).unwrap();
        assert!(c.add_document("a", Side::Item, [("y", 1.0)]).is_err());
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot_similarity(&v(&[(1, 1.0)]), &v(&[(2, 1.0)])), 0.0);
        assert_eq!(dot_similarity(&v(&[(4, 3.0)]), &v(&[(4, 3.0)])), 9.0);
        assert_eq!(
            dot_similarity(&v(&[(1, 1.0), (2, 2.0)]), &v(&[(2, 3.0), (3, 5.0)])),
            6.0
        );
    }

    #[test]
    fn join_examples() {
        let mut engine = MrEngine::new(0, 1);
        let items = [v(&[(0, 2.0)])];
        let consumers = [v(&[(0, 2.0)])];
        let e = candidate_edges(&mut engine, &items, &consumers, 3.0).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].weight, 4.0);
        assert!(candidate_edges(&mut engine, &items, &consumers, 4.5)
            .unwrap()
            .is_empty());
        assert!(candidate_edges(&mut engine, &items, &consumers, 0.0).is_err());
        assert!(naive_join(&items, &consumers, -1.0).is_err());
        assert_eq!(engine.ledger().len(), 4);
    }

    #[test]
    fn ties_at_threshold_are_kept() {
        let mut engine = MrEngine::new(0, 1);
        let items = [v(&[(0, 1.0), (1, 1.0)])];
        let consumers = [v(&[(0, 1.0), (1, 1.0)])];
        assert_eq!(
            candidate_edges(&mut engine, &items, &consumers, 2.0)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(naive_join(&items, &consumers, 2.0).unwrap().len(), 1);
    }

    #[test]
    fn prefix_drops_unreachable_tail() {
        let max: BTreeMap<u32, f64> = [(0, 1.0), (1, 1.0), (2, 1.0)].into_iter().collect();
        let sorted = [(0, 1.0), (1, 1.0), (2, 1.0)];
        assert_eq!(prefix_length(&sorted, &max, 2.5), 1);
        assert_eq!(prefix_length(&sorted, &max, 0.5), 3);
        assert_eq!(prefix_length(&sorted, &max, 3.5), 0);
    }

    fn random_side(rng: &mut ChaCha8Rng, n: usize, vocab: u32) -> Vec<TermVector> {
        (0..n)
            .map(|_| {
                let k = rng.random_range(1..6);
                TermVector::from_entries(
                    (0..k).map(|_| (rng.random_range(0..vocab), rng.random_range(0.1..2.0))),
                )
            })
            .collect()
    }

    #[test]
    fn matches_naive_join_on_random_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let items = random_side(&mut rng, 50, 30);
        let consumers = random_side(&mut rng, 40, 30);
        for partitions in [1, 4] {
            let mut engine = MrEngine::new(0, partitions);
            let fast = candidate_edges(&mut engine, &items, &consumers, 0.3).unwrap();
            let slow = naive_join(&items, &consumers, 0.3).unwrap();
            assert_eq!(fast.len(), slow.len());
            for (a, b) in fast.iter().zip(&slow) {
                assert_eq!(a.key, b.key);
                assert!((a.weight - b.weight).abs() <= 1e-9 * b.weight);
            }
        }
    }
}
