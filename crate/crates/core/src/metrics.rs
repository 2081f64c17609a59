//! Ground-truth scoring and convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::engine::{weight, Matching, Pair};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::irma::IterationSnapshot;

/// The set `R` of pairs representing the same entity, injective both ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    pairs: Vec<Pair>,
    forward: Vec<Option<VertexId>>,
    backward: Vec<Option<VertexId>>,
}

impl GroundTruth {
    pub fn new(left_count: usize, right_count: usize, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut forward = vec![None; left_count];
        let mut backward = vec![None; right_count];
        let mut list = Vec::new();
        for p in pairs {
            if p.u.index() >= left_count || p.v.index() >= right_count {
                return Err(Error::InvalidParameter(format!("truth pair {p} out of range")));
            }
            if forward[p.u.index()].is_some() || backward[p.v.index()].is_some() {
                return Err(Error::InvalidParameter(format!("truth pair {p} is not injective")));
            }
            forward[p.u.index()] = Some(p.v);
            backward[p.v.index()] = Some(p.u);
            list.push(p);
        }
        list.sort_unstable();
        Ok(GroundTruth {
            pairs: list,
            forward,
            backward,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sorted by pair.
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    #[inline]
    pub fn contains(&self, p: Pair) -> bool {
        self.forward.get(p.u.index()).copied().flatten() == Some(p.v)
    }

    #[inline]
    pub fn image(&self, u: VertexId) -> Option<VertexId> {
        self.forward.get(u.index()).copied().flatten()
    }

    #[inline]
    pub fn preimage(&self, v: VertexId) -> Option<VertexId> {
        self.backward.get(v.index()).copied().flatten()
    }

    /// True pairs with at least two true common neighbors, i.e. pairs that
    /// percolation at threshold 2 can reach at all.
    pub fn reachable(&self, g1: &Graph, g2: &Graph) -> Vec<Pair> {
        self.pairs
            .iter()
            .copied()
            .filter(|p| {
                g1.adj(p.u)
                    .iter()
                    .filter(|&&x| self.image(x).is_some_and(|y| g2.has_edge(p.v, y)))
                    .take(2)
                    .count()
                    >= 2
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub weight: usize,
    pub matched_count: usize,
    pub correct_count: usize,
    pub truth_count: usize,
    pub weight_per_pair: f64,
    /// Set when the matching is empty; precision is then reported as 0.
    pub empty_matching: bool,
    /// Recall restricted to true pairs with at least two true common
    /// neighbors.
    pub reachable_recall: f64,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn score_matching(matching: &Matching, truth: &GroundTruth, g1: &Graph, g2: &Graph) -> MetricsReport {
    let correct = matching.pairs().iter().filter(|&&p| truth.contains(p)).count();
    let w = weight(g1, g2, matching);
    let reachable = truth.reachable(g1, g2);
    let reachable_hit = reachable.iter().filter(|&&p| matching.contains(p)).count();
    let precision = ratio(correct, matching.len());
    let recall = ratio(correct, truth.len());
    MetricsReport {
        precision,
        recall,
        f1: f1_score(precision, recall),
        weight: w,
        matched_count: matching.len(),
        correct_count: correct,
        truth_count: truth.len(),
        weight_per_pair: ratio(w, matching.len()),
        empty_matching: matching.is_empty(),
        reachable_recall: ratio(reachable_hit, reachable.len()),
    }
}

/// Change between consecutive snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub from: usize,
    pub to: usize,
    pub weight: i64,
    pub matched: i64,
    pub weight_per_pair: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn convergence_deltas(snapshots: &[IterationSnapshot]) -> Result<Vec<DeltaRow>> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParameter(
            "convergence deltas need at least two snapshots".into(),
        ));
    }
    Ok(snapshots
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let per_pair = |s: &IterationSnapshot| ratio(s.weight, s.matching.len());
            let diff = |f: fn(&MetricsReport) -> f64| match (&a.metrics, &b.metrics) {
                (Some(x), Some(y)) => Some(f(y) - f(x)),
                _ => None,
            };
            DeltaRow {
                from: a.index,
                to: b.index,
                weight: b.weight as i64 - a.weight as i64,
                matched: b.matching.len() as i64 - a.matching.len() as i64,
                weight_per_pair: per_pair(b) - per_pair(a),
                precision: diff(|m| m.precision),
                recall: diff(|m| m.recall),
                f1: diff(|m| m.f1),
            }
        })
        .collect())
}

/// Ranks with ties sharing their average rank (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `None` for fewer than two points or a
/// constant series.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
