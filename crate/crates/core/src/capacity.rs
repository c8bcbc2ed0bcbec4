//! Node capacities derived from activity and quality proxies.
//!
//! Consumers get `α·n(u)`; items share the consumer budget `B` uniformly,
//! by quality, by favorites, or as a constant per question. Every value is
//! rounded half-up and clamped to at least 1.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, NodeId, Side};

/// `max(1, round_half_up(x))`, saturating at `u32::MAX`.
pub fn clamp_capacity(x: f64) -> u32 {
    let r = (x + 0.5).floor();
    if r.is_nan() || r < 1.0 {
        1
    } else if r >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        r as u32
    }
}

/// Activity and quality proxies of one dataset. Vectors are indexed by
/// node index on the corresponding side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActivityProfile {
    pub alpha: f64,
    /// `n(u)` per consumer.
    pub activity: Vec<f64>,
    /// `f(p)` per item, when available.
    pub favorites: Option<Vec<f64>>,
    /// `q(t)` per item, summing to 1, when available.
    pub quality: Option<Vec<f64>>,
}

impl ActivityProfile {
    pub fn new(alpha: f64, activity: Vec<f64>) -> Self {
        ActivityProfile {
            alpha,
            activity,
            ..Self::default()
        }
    }

    fn check_alpha(&self) -> Result<()> {
        if self.alpha.is_finite() && self.alpha > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )))
        }
    }

    /// `Σ_u α·n(u)` before rounding.
    pub fn activity_budget(&self) -> f64 {
        self.activity.iter().map(|n| self.alpha * n).sum()
    }

    /// `Σ_u b(u)` after rounding and clamping.
    pub fn consumer_budget(&self) -> Result<f64> {
        (0..self.activity.len())
            .map(|u| consumer_capacity(self, u).map(f64::from))
            .sum()
    }
}

/// `max(1, round(α·n(u)))`.
pub fn consumer_capacity(p: &ActivityProfile, u: usize) -> Result<u32> {
    p.check_alpha()?;
    let n = p
        .activity
        .get(u)
        .ok_or_else(|| Error::InvalidParameter(format!("no activity for consumer {u}")))?;
    Ok(clamp_capacity(p.alpha * n))
}

/// `max(1, round(B/|T|))`.
pub fn item_capacity_uniform(total_b: f64, num_items: usize) -> Result<u32> {
    if num_items == 0 {
        return Err(Error::InvalidParameter(
            "no items to share the budget".into(),
        ));
    }
    Ok(clamp_capacity(total_b / num_items as f64))
}

fn check_normalized(q: &[f64]) -> Result<()> {
    let sum: f64 = q.iter().sum();
    if q.iter().any(|&x| !(0.0..=1.0).contains(&x))
        || (sum - 1.0).abs() > 1e-9 * q.len().max(1) as f64
    {
        return Err(Error::InvalidParameter(format!(
            "quality scores must lie in [0, 1] and sum to 1, sum is {sum}"
        )));
    }
    Ok(())
}

/// `max(1, round(q(t)·B))`.
pub fn item_capacity_quality(p: &ActivityProfile, t: usize, total_b: f64) -> Result<u32> {
    let q = p
        .quality
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("profile has no quality scores".into()))?;
    check_normalized(q)?;
    let qt = q
        .get(t)
        .ok_or_else(|| Error::InvalidParameter(format!("no quality for item {t}")))?;
    Ok(clamp_capacity(qt * total_b))
}

/// `max(1, round(f(p)·B/Σf))` with `B = Σ_u α·n(u)`.
pub fn favorites_capacity(p: &ActivityProfile, item: usize) -> Result<u32> {
    p.check_alpha()?;
    let f = p
        .favorites
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("profile has no favorites".into()))?;
    let total: f64 = f.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidParameter("favorites sum to zero".into()));
    }
    let fp = f
        .get(item)
        .ok_or_else(|| Error::InvalidParameter(format!("no favorites for item {item}")))?;
    Ok(clamp_capacity(fp * p.activity_budget() / total))
}

/// `max(1, round(B/|Q|))` with `B = Σ_u α·n(u)`, shared by all questions.
pub fn question_capacity(p: &ActivityProfile, num_questions: usize) -> Result<u32> {
    p.check_alpha()?;
    if num_questions == 0 {
        return Err(Error::InvalidParameter("no questions".into()));
    }
    Ok(clamp_capacity(p.activity_budget() / num_questions as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityModel {
    Uniform,
    Quality,
    Favorites,
    Question,
}

impl CapacityModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CapacityModel::Uniform => "uniform",
            CapacityModel::Quality => "quality",
            CapacityModel::Favorites => "favorites",
            CapacityModel::Question => "question",
        }
    }
}

impl FromStr for CapacityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(CapacityModel::Uniform),
            "quality" => Ok(CapacityModel::Quality),
            "favorites" => Ok(CapacityModel::Favorites),
            "question" => Ok(CapacityModel::Question),
            other => Err(Error::InvalidParameter(format!(
                "unknown capacity model {other:?}"
            ))),
        }
    }
}

/// Capacity totals of both sides after assignment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetReport {
    pub item_total: u64,
    pub consumer_total: u64,
}

impl BudgetReport {
    /// `Σ b(t) − Σ b(c)`.
    pub fn slack(&self) -> i64 {
        self.item_total as i64 - self.consumer_total as i64
    }
}

/// Sets every node capacity of `g` from `p` under `model`. Consumer `j` of
/// the graph reads `activity[j]`, item `i` reads `favorites[i]` or
/// `quality[i]`.
pub fn assign_capacities(
    g: &mut BipartiteGraph,
    p: &ActivityProfile,
    model: CapacityModel,
) -> Result<BudgetReport> {
    let consumers = g.consumer_count() as usize;
    let items = g.item_count() as usize;
    if p.activity.len() != consumers {
        return Err(Error::InvalidParameter(format!(
            "activity has {} entries for {consumers} consumers",
            p.activity.len()
        )));
    }
    for u in 0..consumers {
        g.set_capacity(NodeId::consumer(u as u32), consumer_capacity(p, u)?)?;
    }
    let per_item: Vec<u32> = match model {
        CapacityModel::Uniform => {
            let b = item_capacity_uniform(p.consumer_budget()?, items)?;
            vec![b; items]
        }
        CapacityModel::Quality => {
            let total = p.consumer_budget()?;
            (0..items)
                .map(|t| item_capacity_quality(p, t, total))
                .collect::<Result<_>>()?
        }
        CapacityModel::Favorites => (0..items)
            .map(|t| favorites_capacity(p, t))
            .collect::<Result<_>>()?,
        CapacityModel::Question => vec![question_capacity(p, items)?; items],
    };
    for (t, b) in per_item.into_iter().enumerate() {
        g.set_capacity(NodeId::item(t as u32), b)?;
    }
    Ok(BudgetReport {
        item_total: g.total_capacity(Side::Item),
        consumer_total: g.total_capacity(Side::Consumer),
    })
}

/// Gini coefficient of non-negative values; 0 for empty or all-zero input.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let weighted: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| (i as f64 + 1.0) * x)
        .sum();
    (2.0 * weighted) / (n as f64 * total) - (n as f64 + 1.0) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(alpha: f64, activity: &[f64]) -> ActivityProfile {
        ActivityProfile::new(alpha, activity.to_vec())
    }

    #[test]
    fn consumer_examples() {
        assert_eq!(consumer_capacity(&profile(2.0, &[3.0]), 0).unwrap(), 6);
        assert_eq!(consumer_capacity(&profile(0.1, &[3.0]), 0).unwrap(), 1);
        assert_eq!(consumer_capacity(&profile(1.0, &[0.0]), 0).unwrap(), 1);
        assert!(consumer_capacity(&profile(0.0, &[1.0]), 0).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(clamp_capacity(2.5), 3);
        assert_eq!(clamp_capacity(2.49), 2);
        assert_eq!(clamp_capacity(-3.0), 1);
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(item_capacity_uniform(100.0, 10).unwrap(), 10);
        assert_eq!(item_capacity_uniform(5.0, 100).unwrap(), 1);
        assert_eq!(item_capacity_uniform(0.0, 3).unwrap(), 1);
        assert!(item_capacity_uniform(10.0, 0).is_err());
    }

    #[test]
    fn quality_examples() {
        let mut p = profile(1.0, &[]);
        p.quality = Some(vec![0.5, 0.499, 0.001]);
        assert_eq!(item_capacity_quality(&p, 0, 10.0).unwrap(), 5);
        assert_eq!(item_capacity_quality(&p, 2, 10.0).unwrap(), 1);
        p.quality = Some(vec![0.25; 4]);
        for t in 0..4 {
            assert_eq!(
                item_capacity_quality(&p, t, 40.0).unwrap(),
                item_capacity_uniform(40.0, 4).unwrap()
            );
        }
        p.quality = Some(vec![0.5, 0.6]);
        assert!(item_capacity_quality(&p, 0, 10.0).is_err());
    }

    #[test]
    fn favorites_examples() {
        // B = 100 from 10 consumers of activity 10 at alpha 1; Σf = 50.
        let mut p = profile(1.0, &[10.0; 10]);
        p.favorites = Some(vec![5.0, 0.0, 45.0]);
        assert_eq!(favorites_capacity(&p, 0).unwrap(), 10);
        assert_eq!(favorites_capacity(&p, 1).unwrap(), 1);
        p.favorites = Some(vec![7.0]);
        assert_eq!(favorites_capacity(&p, 0).unwrap(), 100);
        p.favorites = Some(vec![0.0, 0.0]);
        assert!(favorites_capacity(&p, 0).is_err());
    }

    #[test]
    fn question_examples() {
        let p = profile(1.0, &[10.0; 100]);
        assert_eq!(question_capacity(&p, 100).unwrap(), 10);
        assert_eq!(question_capacity(&p, 2000).unwrap(), 1);
        let doubled = profile(2.0, &[10.0; 100]);
        assert_eq!(question_capacity(&doubled, 100).unwrap(), 20);
        assert!(question_capacity(&p, 0).is_err());
    }

    #[test]
    fn assignment_reports_budgets() {
        let mut g = BipartiteGraph::new();
        for _ in 0..3 {
            g.add_item(1);
        }
        for _ in 0..2 {
            g.add_consumer(1);
        }
        let p = profile(1.5, &[4.0, 2.0]);
        let r = assign_capacities(&mut g, &p, CapacityModel::Uniform).unwrap();
        assert_eq!(r.consumer_total, 9);
        assert_eq!(r.item_total, 9);
        assert_eq!(r.slack(), 0);
        assert!(assign_capacities(&mut g, &profile(1.0, &[1.0]), CapacityModel::Uniform).is_err());
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0]), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 1.0]) - 0.75).abs() < 1e-12);
        assert_eq!(gini(&[]), 0.0);
    }
}
