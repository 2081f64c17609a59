//! ExpandWhenStuck percolation matching and the simplified ExpandOnce
//! process used by the statistical harness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::percolator::{artificial_seed, Percolator};
use crate::engine::{
    artificial_cap, validate_seed, MarkTable, Matching, Pair, RunStats, Scoring, SpreadLog, Trace,
    TraceEvent,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::synth;

/// Admission threshold of plain percolation.
pub const MARK_THRESHOLD: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EwsConfig {
    /// An artificial seed spreads from at most `factor · |V1|` pairs, best
    /// [`ScoreKey`](crate::engine::ScoreKey) first. `None` disables the cap.
    pub artificial_cap_factor: Option<f64>,
    /// Record a replayable [`Trace`].
    pub trace: bool,
}

impl Default for EwsConfig {
    fn default() -> Self {
        EwsConfig {
            artificial_cap_factor: Some(2.0),
            trace: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EwsResult {
    pub matching: Matching,
    /// Final mark counts of the run.
    pub marks: MarkTable,
    /// Every pair that spread marks.
    pub used: SpreadLog,
    pub stats: RunStats,
    pub trace: Option<Trace>,
}

/// ExpandWhenStuck.
///
/// Seeds enter the matching and spread first. The best admissible pair
/// with at least two marks is then admitted and spreads, until none is
/// left. When stuck, every unused neighboring pair of a matched pair with
/// both endpoints unmatched becomes an artificial seed and spreads. The
/// run ends when that set is empty.
pub fn expand_when_stuck(g1: &Graph, g2: &Graph, seed: &[Pair], cfg: &EwsConfig) -> Result<EwsResult> {
    expand_when_stuck_at(g1, g2, seed, cfg, 0)
}

pub(crate) fn expand_when_stuck_at(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    cfg: &EwsConfig,
    iteration: u32,
) -> Result<EwsResult> {
    validate_seed(g1, g2, seed)?;
    let cap = artificial_cap(cfg.artificial_cap_factor, g1.vertex_count());
    let mut perc = Percolator::new(g1, g2, None, MARK_THRESHOLD, cfg.trace);
    perc.begin(iteration, Scoring::Current);
    for &p in seed {
        perc.place_seed(p)?;
    }
    let mut restart: Vec<Pair> = seed.to_vec();
    let mut first = true;
    while !restart.is_empty() {
        for &p in &restart {
            debug_assert!(first || (perc.matching.is_free(p) && !perc.used.contains(p)));
            perc.spread(p);
        }
        if !first {
            perc.stats.artificial_rounds += 1;
            perc.stats.artificial_pairs += restart.len();
        }
        first = false;
        perc.run_greedy();
        let next = perc.artificial_seed(cap);
        if next.capped {
            perc.stats.cap_hits += 1;
        }
        restart = next.pairs;
    }
    Ok(EwsResult {
        matching: perc.matching,
        marks: perc.marks,
        used: perc.used,
        stats: perc.stats,
        trace: perc.trace,
    })
}

/// ExpandOnce: a simplified percolation whose artificial seed is built only
/// once, right after the seed spreads. A pair is admitted the moment its
/// mark count reaches the threshold, if it is free at that moment; the next
/// spreading pair is drawn uniformly from matched pairs that have not
/// spread yet.
pub fn expand_once(g1: &Graph, g2: &Graph, seed: &[Pair], rng_seed: u64, cfg: &EwsConfig) -> Result<EwsResult> {
    validate_seed(g1, g2, seed)?;
    let mut rng = synth::rng(rng_seed);
    let mut state = OnceState {
        g1,
        g2,
        marks: MarkTable::new(),
        matching: Matching::new(g1.vertex_count(), g2.vertex_count()),
        used: SpreadLog::new(),
        pending: Vec::new(),
        stats: RunStats::default(),
        trace: cfg.trace.then(Trace::new),
    };
    state.record(TraceEvent::Begin {
        iteration: 0,
        threshold: MARK_THRESHOLD,
        scoring: Scoring::Immediate,
    });
    for &p in seed {
        state.matching.insert(p).expect("seed validated");
        state.record(TraceEvent::Seed(p));
    }
    if seed.is_empty() {
        return Ok(state.finish());
    }
    for &p in seed {
        state.spread(p);
    }
    let cap = artificial_cap(cfg.artificial_cap_factor, g1.vertex_count());
    let noisy = artificial_seed(g1, g2, &state.matching, &state.used, &state.marks, cap);
    if noisy.capped {
        state.stats.cap_hits += 1;
    }
    state.stats.artificial_rounds = 1;
    state.stats.artificial_pairs = noisy.pairs.len();
    for &p in &noisy.pairs {
        state.spread(p);
    }
    while !state.pending.is_empty() {
        let i = rng.random_range(0..state.pending.len());
        let p = state.pending.swap_remove(i);
        state.spread(p);
    }
    Ok(state.finish())
}

struct OnceState<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    marks: MarkTable,
    matching: Matching,
    used: SpreadLog,
    /// Matched pairs that have not spread.
    pending: Vec<Pair>,
    stats: RunStats,
    trace: Option<Trace>,
}

impl OnceState<'_> {
    fn record(&mut self, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event);
        }
    }

    fn spread(&mut self, pair: Pair) {
        if !self.used.insert(pair) {
            return;
        }
        self.record(TraceEvent::Spread(pair));
        let (g1, g2) = (self.g1, self.g2);
        let left = g1.adj(pair.u);
        let right = g2.adj(pair.v);
        for &a in left {
            for &b in right {
                let p = Pair { u: a, v: b };
                let count = self.marks.increment(p);
                if count == MARK_THRESHOLD && self.matching.is_free(p) {
                    self.matching.insert(p).expect("checked free");
                    self.stats.steps += 1;
                    self.record(TraceEvent::Insert {
                        pair: p,
                        marks: count,
                        degree_gap: p.degree_gap(g1, g2),
                    });
                    if !self.used.contains(p) {
                        self.pending.push(p);
                    }
                }
            }
        }
        self.stats.spreads += 1;
        self.stats.mark_increments += (left.len() * right.len()) as u64;
    }

    fn finish(self) -> EwsResult {
        EwsResult {
            matching: self.matching,
            marks: self.marks,
            used: self.used,
            stats: self.stats,
            trace: self.trace,
        }
    }
}
