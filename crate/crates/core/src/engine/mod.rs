//! Shared percolation machinery: pair keys, mark tables, the candidate
//! ordering, conflict tracking and the lazy priority queue.

mod marks;
mod matching;
mod pair;
pub(crate) mod percolator;
mod queue;
mod trace;

use serde::{Deserialize, Serialize};

pub use marks::{spread_marks, MarkTable, SpreadLog, SpreadOutcome};
pub use matching::{InsertError, Matching};
pub use pair::{Pair, ScoreKey};
pub use percolator::ArtificialSeed;
pub use queue::{best_candidate, weight, CandidateQueue};
pub use trace::{Scoring, Trace, TraceEvent};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Counters collected by one run of an algorithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Non-seed pairs admitted to the matching.
    pub steps: usize,
    /// Spread operations performed.
    pub spreads: usize,
    /// Mark increments, `Σ d1(u)·d2(v)` over spreading pairs.
    pub mark_increments: u64,
    /// Artificial seeds generated after the initial seed.
    pub artificial_rounds: usize,
    /// Pairs spread as part of artificial seeds.
    pub artificial_pairs: usize,
    /// Artificial-seed rounds where the size cap discarded candidates.
    pub cap_hits: usize,
    /// Parallel epochs (zero for sequential runs).
    pub epochs: usize,
}

impl RunStats {
    pub fn absorb(&mut self, other: &RunStats) {
        self.steps += other.steps;
        self.spreads += other.spreads;
        self.mark_increments += other.mark_increments;
        self.artificial_rounds += other.artificial_rounds;
        self.artificial_pairs += other.artificial_pairs;
        self.cap_hits += other.cap_hits;
        self.epochs += other.epochs;
    }
}

/// Checks that seed pairs reference valid vertices and are mutually
/// non-conflicting. Exact duplicates are rejected too.
pub fn validate_seed(g1: &Graph, g2: &Graph, seed: &[Pair]) -> Result<()> {
    let mut m = Matching::new(g1.vertex_count(), g2.vertex_count());
    for &p in seed {
        m.insert(p)
            .map_err(|e| Error::InvalidSeed(format!("pair {p}: {e:?}")))?;
    }
    Ok(())
}

/// Spread cap for an artificial seed: `factor · |V1|`, rounded up.
pub(crate) fn artificial_cap(factor: Option<f64>, left_count: usize) -> Option<usize> {
    factor.map(|f| (f * left_count as f64).ceil().max(0.0) as usize)
}
