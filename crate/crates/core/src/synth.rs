//! Seeded synthetic datasets: tagged documents on both sides, a similarity
//! join, and capacities from heavy-tailed activity.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::capacity::{assign_capacities, ActivityProfile, BudgetReport, CapacityModel};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Side};
use crate::mr::engine::MrEngine;
use crate::simjoin::{candidate_edges, tfidf_weight, Corpus};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub items: usize,
    pub consumers: usize,
    pub vocab: usize,
    /// Tag draws per document.
    pub tags_per_doc: usize,
    /// Zipf exponent of the tag popularity.
    pub tag_exponent: f64,
    /// Tail exponent of activity and favorites; 0 gives every node the
    /// same activity, larger values give a heavier tail.
    pub activity_exponent: f64,
    pub max_activity: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub capacity_model: CapacityModel,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            items: 100,
            consumers: 100,
            vocab: 200,
            tags_per_doc: 6,
            tag_exponent: 1.0,
            activity_exponent: 0.5,
            max_activity: 1000.0,
            sigma: 1.0,
            alpha: 1.0,
            capacity_model: CapacityModel::Uniform,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad value {value:?} for {key}"),
    })
}

impl SynthSpec {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    /// Keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = SynthSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key=value, got {l:?}"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "items" => s.items = parse_value(k, v, line)?,
                "consumers" => s.consumers = parse_value(k, v, line)?,
                "vocab" => s.vocab = parse_value(k, v, line)?,
                "tags_per_doc" => s.tags_per_doc = parse_value(k, v, line)?,
                "tag_exponent" => s.tag_exponent = parse_value(k, v, line)?,
                "activity_exponent" => s.activity_exponent = parse_value(k, v, line)?,
                "max_activity" => s.max_activity = parse_value(k, v, line)?,
                "sigma" => s.sigma = parse_value(k, v, line)?,
                "alpha" => s.alpha = parse_value(k, v, line)?,
                "capacity_model" => s.capacity_model = v.parse()?,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(s)
    }

    /// The spec as `key=value` lines, readable by [`SynthSpec::parse`].
    pub fn to_text(&self) -> String {
        format!(
            "items={}\nconsumers={}\nvocab={}\ntags_per_doc={}\ntag_exponent={}\nactivity_exponent={}\nmax_activity={}\nsigma={}\nalpha={}\ncapacity_model={}\n",
            self.items,
            self.consumers,
            self.vocab,
            self.tags_per_doc,
            self.tag_exponent,
            self.activity_exponent,
            self.max_activity,
            self.sigma,
            self.alpha,
            self.capacity_model.as_str()
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.items == 0 || self.consumers == 0 {
            return bad("items and consumers must be positive");
        }
        if self.vocab == 0 {
            return bad("vocab must be positive");
        }
        if self.tags_per_doc == 0 {
            return bad("tags_per_doc must be positive");
        }
        if !(self.tag_exponent.is_finite() && self.tag_exponent >= 0.0) {
            return bad("tag_exponent must be non-negative");
        }
        if !(self.activity_exponent.is_finite() && self.activity_exponent >= 0.0) {
            return bad("activity_exponent must be non-negative");
        }
        if self.max_activity.is_nan() || self.max_activity < 1.0 {
            return bad("max_activity must be at least 1");
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad("sigma must be positive");
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SynthData {
    pub graph: BipartiteGraph,
    /// tf-idf weighted corpus the join ran on.
    pub corpus: Corpus,
    pub profile: ActivityProfile,
    pub budget: BudgetReport,
}

/// `min(cap, ⌊U^(−a)⌋)` for `U` uniform on `(0, 1]`.
fn heavy_tailed(rng: &mut ChaCha8Rng, a: f64, cap: f64) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    u.powf(-a).floor().min(cap)
}

/// Joins the two sides of a raw-count corpus at `sigma` and returns the
/// resulting graph (all capacities 1) with the weighted corpus. Nodes keep
/// corpus order and document ids as labels.
pub fn join_graph(
    engine: &mut MrEngine,
    raw: &Corpus,
    sigma: f64,
) -> Result<(BipartiteGraph, Corpus)> {
    let weighted = tfidf_weight(raw)?;
    let items = weighted.vectors(Side::Item);
    let consumers = weighted.vectors(Side::Consumer);
    let edges = candidate_edges(engine, &items, &consumers, sigma)?;
    let mut g = BipartiteGraph::new();
    for id in weighted.ids(Side::Item) {
        g.add_labeled(Side::Item, id, 1);
    }
    for id in weighted.ids(Side::Consumer) {
        g.add_labeled(Side::Consumer, id, 1);
    }
    for e in edges {
        g.add_edge(e.key.low, e.key.high, e.weight)?;
    }
    Ok((g, weighted))
}

/// Generates a dataset fully determined by `spec` and `seed`.
pub fn synth_dataset(engine: &mut MrEngine, spec: &SynthSpec, seed: u64) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(spec.vocab as f64, spec.tag_exponent)
        .map_err(|e| Error::InvalidParameter(format!("tag distribution: {e}")))?;

    let mut raw = Corpus::new();
    let sides = [
        (Side::Item, spec.items, 't'),
        (Side::Consumer, spec.consumers, 'c'),
    ];
    for (side, count, prefix) in sides {
        for i in 0..count {
            let tags: Vec<(String, f64)> = (0..spec.tags_per_doc)
                .map(|_| (format!("tag{}", zipf.sample(&mut rng) as u64), 1.0))
                .collect();
            raw.add_document(format!("{prefix}{i}"), side, tags)?;
        }
    }
    let activity: Vec<f64> = (0..spec.consumers)
        .map(|_| heavy_tailed(&mut rng, spec.activity_exponent, spec.max_activity))
        .collect();
    let favorites: Vec<f64> = (0..spec.items)
        .map(|_| heavy_tailed(&mut rng, spec.activity_exponent, spec.max_activity))
        .collect();
    let total: f64 = favorites.iter().sum();
    let quality: Vec<f64> = favorites.iter().map(|f| f / total).collect();
    let profile = ActivityProfile {
        alpha: spec.alpha,
        activity,
        favorites: Some(favorites),
        quality: Some(quality),
    };

    let (mut graph, corpus) = join_graph(engine, &raw, spec.sigma)?;
    let budget = assign_capacities(&mut graph, &profile, spec.capacity_model)?;
    Ok(SynthData {
        graph,
        corpus,
        profile,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SynthSpec {
        SynthSpec {
            items: 10,
            consumers: 10,
            vocab: 5,
            tags_per_doc: 3,
            sigma: 0.5,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn reproducible_under_seed() {
        let a = synth_dataset(&mut MrEngine::new(0, 1), &tiny(), 9).unwrap();
        let b = synth_dataset(&mut MrEngine::new(0, 3), &tiny(), 9).unwrap();
        assert_eq!(a.graph.edge_count(), b.graph.edge_count());
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.graph.capacities(), b.graph.capacities());
    }

    #[test]
    fn high_sigma_gives_empty_graph() {
        let spec = SynthSpec {
            sigma: 1e9,
            ..tiny()
        };
        let d = synth_dataset(&mut MrEngine::new(0, 1), &spec, 1).unwrap();
        assert_eq!(d.graph.edge_count(), 0);
        assert_eq!(d.graph.node_count(), 20);
    }

    #[test]
    fn infeasible_specs_rejected() {
        for spec in [
            SynthSpec { vocab: 0, ..tiny() },
            SynthSpec { items: 0, ..tiny() },
            SynthSpec {
                sigma: 0.0,
                ..tiny()
            },
        ] {
            assert!(synth_dataset(&mut MrEngine::new(0, 1), &spec, 1).is_err());
        }
    }

    #[test]
    fn spec_text_round_trip() {
        let s = SynthSpec {
            capacity_model: CapacityModel::Favorites,
            sigma: 0.25,
            ..tiny()
        };
        assert_eq!(SynthSpec::parse(&s.to_text()).unwrap(), s);
        assert!(SynthSpec::parse("bogus=1").is_err());
        assert!(SynthSpec::parse("items").is_err());
        assert!(SynthSpec::parse("items=x").is_err());
        let partial = SynthSpec::parse("# comment\n\nitems = 7\n").unwrap();
        assert_eq!(partial.items, 7);
    }
}
