//! Iterative repair on top of percolation matching.
//!
//! Every repairing iteration rebuilds the matching from the seed, scoring a
//! candidate by the larger of its marks in this iteration and its final
//! marks in the previous one. Phase 1 repeats this while the matching
//! weight grows by more than a factor `1 + delta`. An optional exploration
//! iteration at threshold 1 then trades precision for recall, and a fixed
//! number of ordinary repairs restores precision.

use serde::{Deserialize, Serialize};

use crate::engine::percolator::Percolator;
use crate::engine::{validate_seed, weight, MarkTable, Matching, Pair, RunStats, Scoring, Trace};
use crate::error::{Error, Result};
use crate::ews::{expand_when_stuck_at, EwsConfig, MARK_THRESHOLD};
use crate::graph::Graph;
use crate::metrics::{score_matching, GroundTruth, MetricsReport};

/// Admission threshold of the exploration iteration.
pub const EXPLORE_THRESHOLD: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrmaConfig {
    /// Relative weight gain required to keep repairing in phase 1.
    pub delta: f64,
    /// Run the exploration iteration after phase 1.
    pub explore: bool,
    /// Repairing iterations after exploration.
    pub post_explore_iters: usize,
    /// Cap on phase-1 repairing iterations.
    pub max_iters: usize,
    pub ews: EwsConfig,
}

impl Default for IrmaConfig {
    fn default() -> Self {
        IrmaConfig {
            delta: 0.01,
            explore: true,
            post_explore_iters: 4,
            max_iters: 30,
            ews: EwsConfig::default(),
        }
    }
}

impl IrmaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta {} must be >= 0", self.delta)));
        }
        if self.explore && self.post_explore_iters < 1 {
            return Err(Error::InvalidParameter(
                "post_explore_iters must be >= 1 when exploring".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationKind {
    /// Initial percolation (sequential or epoch-parallel).
    Initial,
    Repair,
    Explore,
}

impl IterationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IterationKind::Initial => "initial",
            IterationKind::Repair => "repair",
            IterationKind::Explore => "explore",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationSnapshot {
    pub index: usize,
    pub kind: IterationKind,
    pub threshold: u32,
    pub matching: Matching,
    /// Final marks of this iteration. A finished run keeps only the last
    /// iteration's table.
    pub marks: Option<MarkTable>,
    pub weight: usize,
    pub metrics: Option<MetricsReport>,
    pub stats: RunStats,
}

/// Output of one iteration before it is wrapped in a snapshot.
pub(crate) struct Step {
    pub matching: Matching,
    pub marks: MarkTable,
    pub stats: RunStats,
    pub trace: Option<Trace>,
}

#[derive(Clone, Debug)]
pub struct IrmaRun {
    pub snapshots: Vec<IterationSnapshot>,
    /// Snapshot holding the returned matching.
    pub final_index: usize,
    /// Last snapshot of phase 1.
    pub phase1_last: usize,
    pub explore_index: Option<usize>,
    /// Phase 1 hit `max_iters` before the stop rule fired.
    pub truncated: bool,
    pub trace: Option<Trace>,
}

impl IrmaRun {
    pub fn final_snapshot(&self) -> &IterationSnapshot {
        &self.snapshots[self.final_index]
    }

    pub fn final_matching(&self) -> &Matching {
        &self.final_snapshot().matching
    }

    pub fn total_stats(&self) -> RunStats {
        let mut total = RunStats::default();
        for s in &self.snapshots {
            total.absorb(&s.stats);
        }
        total
    }
}

fn check_threshold(threshold: u32) -> Result<()> {
    match threshold {
        1 | 2 => Ok(()),
        t => Err(Error::InvalidThreshold(t)),
    }
}

/// One repairing iteration: rebuild the matching from `seed`, admitting the
/// best free pair whose `max(current, previous)` marks reach `threshold`
/// and spreading from it, until none is left.
pub fn repairing_iteration(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    prev_marks: &MarkTable,
    threshold: u32,
) -> Result<IterationSnapshot> {
    check_threshold(threshold)?;
    validate_seed(g1, g2, seed)?;
    let step = repair_step(g1, g2, seed, prev_marks, threshold, 0, false)?;
    let kind = if threshold == EXPLORE_THRESHOLD {
        IterationKind::Explore
    } else {
        IterationKind::Repair
    };
    Ok(snapshot(g1, g2, None, 0, kind, threshold, step, true))
}

pub(crate) fn repair_step(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    prev_marks: &MarkTable,
    threshold: u32,
    iteration: u32,
    tracing: bool,
) -> Result<Step> {
    let mut perc = Percolator::new(g1, g2, Some(prev_marks), threshold, tracing);
    perc.begin(iteration, Scoring::MaxWithPrevious);
    for &p in seed {
        perc.place_seed(p)?;
    }
    for &p in seed {
        perc.spread(p);
    }
    perc.seed_queue_from_previous();
    perc.run_greedy();
    Ok(Step {
        matching: perc.matching,
        marks: perc.marks,
        stats: perc.stats,
        trace: perc.trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    g1: &Graph,
    g2: &Graph,
    truth: Option<&GroundTruth>,
    index: usize,
    kind: IterationKind,
    threshold: u32,
    step: Step,
    keep_marks: bool,
) -> IterationSnapshot {
    let metrics = truth.map(|t| score_matching(&step.matching, t, g1, g2));
    IterationSnapshot {
        index,
        kind,
        threshold,
        weight: weight(g1, g2, &step.matching),
        matching: step.matching,
        marks: keep_marks.then_some(step.marks),
        metrics,
        stats: step.stats,
    }
}

/// Sequential IRMA. The first snapshot is ExpandWhenStuck; with ground
/// truth supplied every snapshot carries metrics.
pub fn irma(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    cfg: &IrmaConfig,
    truth: Option<&GroundTruth>,
) -> Result<IrmaRun> {
    cfg.validate()?;
    validate_seed(g1, g2, seed)?;
    let tracing = cfg.ews.trace;
    drive(
        g1,
        g2,
        cfg,
        truth,
        || {
            let r = expand_when_stuck_at(g1, g2, seed, &cfg.ews, 0)?;
            Ok(Step {
                matching: r.matching,
                marks: r.marks,
                stats: r.stats,
                trace: r.trace,
            })
        },
        |prev, threshold, index| repair_step(g1, g2, seed, prev, threshold, index, tracing),
    )
}

/// Shared iteration schedule of the sequential and parallel drivers.
pub(crate) fn drive(
    g1: &Graph,
    g2: &Graph,
    cfg: &IrmaConfig,
    truth: Option<&GroundTruth>,
    first: impl FnOnce() -> Result<Step>,
    mut repair: impl FnMut(&MarkTable, u32, u32) -> Result<Step>,
) -> Result<IrmaRun> {
    let mut trace: Option<Trace> = None;
    let mut snapshots: Vec<IterationSnapshot> = Vec::new();
    let mut run_step = |step: Step,
                        kind: IterationKind,
                        threshold: u32,
                        snapshots: &mut Vec<IterationSnapshot>|
     -> MarkTable {
        let Step {
            matching,
            marks,
            stats,
            trace: step_trace,
        } = step;
        if let Some(t) = step_trace {
            trace.get_or_insert_with(Trace::new).extend(t);
        }
        let index = snapshots.len();
        let snap = snapshot(
            g1,
            g2,
            truth,
            index,
            kind,
            threshold,
            Step {
                matching,
                marks: MarkTable::new(),
                stats,
                trace: None,
            },
            false,
        );
        snapshots.push(snap);
        marks
    };

    let mut prev_marks = run_step(first()?, IterationKind::Initial, MARK_THRESHOLD, &mut snapshots);
    // Phase 1 compares against the empty matching first.
    let mut previous_weight = 0usize;
    let mut repairs = 0;
    let mut truncated = false;
    loop {
        let current_weight = snapshots.last().expect("initial snapshot").weight;
        if !(current_weight as f64 > (1.0 + cfg.delta) * previous_weight as f64) {
            break;
        }
        if repairs >= cfg.max_iters {
            truncated = true;
            break;
        }
        let index = snapshots.len() as u32;
        let step = repair(&prev_marks, MARK_THRESHOLD, index)?;
        prev_marks = run_step(step, IterationKind::Repair, MARK_THRESHOLD, &mut snapshots);
        previous_weight = current_weight;
        repairs += 1;
    }
    let phase1_last = snapshots.len() - 1;
    let mut final_index = phase1_last;
    if phase1_last >= 1 && snapshots[phase1_last - 1].weight > snapshots[phase1_last].weight {
        final_index = phase1_last - 1;
    }

    let mut explore_index = None;
    if cfg.explore {
        let index = snapshots.len() as u32;
        let step = repair(&prev_marks, EXPLORE_THRESHOLD, index)?;
        prev_marks = run_step(step, IterationKind::Explore, EXPLORE_THRESHOLD, &mut snapshots);
        explore_index = Some(snapshots.len() - 1);
        for _ in 0..cfg.post_explore_iters {
            let index = snapshots.len() as u32;
            let step = repair(&prev_marks, MARK_THRESHOLD, index)?;
            prev_marks = run_step(step, IterationKind::Repair, MARK_THRESHOLD, &mut snapshots);
        }
        final_index = snapshots.len() - 1;
    }
    snapshots.last_mut().expect("nonempty").marks = Some(prev_marks);
    Ok(IrmaRun {
        snapshots,
        final_index,
        phase1_last,
        explore_index,
        truncated,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_must_be_one_or_two() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let err = repairing_iteration(&g, &g, &[], &MarkTable::new(), 3).unwrap_err();
        assert!(matches!(err, Error::InvalidThreshold(3)));
    }

    #[test]
    fn config_validation() {
        let mut cfg = IrmaConfig {
            delta: -0.1,
            ..IrmaConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.delta = 0.0;
        cfg.post_explore_iters = 0;
        assert!(cfg.validate().is_err());
        cfg.explore = false;
        assert!(cfg.validate().is_ok());
    }

    fn clique(n: u32) -> Graph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Graph::from_edges(n as usize, &edges).unwrap()
    }

    #[test]
    fn clique_run_keeps_full_weight() {
        let g = clique(6);
        let seed = [Pair::new(0, 0), Pair::new(1, 1)];
        let run = irma(&g, &g, &seed, &IrmaConfig::default(), None).unwrap();
        assert_eq!(run.snapshots[0].kind, IterationKind::Initial);
        assert_eq!(run.final_snapshot().weight, 15);
        // Initial, one repair that stalls the weight, explore, four repairs.
        assert_eq!(run.phase1_last, 1);
        assert_eq!(run.explore_index, Some(2));
        assert_eq!(run.snapshots.len(), 7);
        assert!(run.snapshots.last().unwrap().marks.is_some());
        assert!(run.snapshots[0].marks.is_none());
    }

    #[test]
    fn without_explore_final_is_heavier_of_last_two() {
        let g = clique(5);
        let cfg = IrmaConfig {
            explore: false,
            ..IrmaConfig::default()
        };
        let run = irma(&g, &g, &[Pair::new(0, 0), Pair::new(1, 1)], &cfg, None).unwrap();
        assert_eq!(run.explore_index, None);
        let last = run.phase1_last;
        let w = |i: usize| run.snapshots[i].weight;
        assert!(last >= 1);
        assert_eq!(w(run.final_index), w(last).max(w(last - 1)));
    }

    #[test]
    fn max_iters_truncates() {
        let g = clique(5);
        let cfg = IrmaConfig {
            delta: 0.0,
            max_iters: 0,
            explore: false,
            ..IrmaConfig::default()
        };
        let run = irma(&g, &g, &[Pair::new(0, 0), Pair::new(1, 1)], &cfg, None).unwrap();
        assert!(run.truncated);
        assert_eq!(run.snapshots.len(), 1);
    }

    #[test]
    fn repair_reuses_previous_marks() {
        // A 4-cycle with one seed: the opposite corner has two marks only
        // when the previous table is consulted.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let seed = [Pair::new(0, 0)];
        let mut prev = MarkTable::new();
        prev.increment(Pair::new(1, 1));
        prev.increment(Pair::new(1, 1));
        let snap = repairing_iteration(&g, &g, &seed, &prev, MARK_THRESHOLD).unwrap();
        assert!(snap.matching.contains(Pair::new(1, 1)));
        let cold = repairing_iteration(&g, &g, &seed, &MarkTable::new(), MARK_THRESHOLD).unwrap();
        assert!(!cold.matching.contains(Pair::new(1, 1)));
    }
}
