use rustc_hash::FxHashSet;

use super::marks::{MarkTable, SpreadLog};
use super::matching::Matching;
use super::pair::{Pair, ScoreKey};
use super::queue::CandidateQueue;
use super::trace::{Scoring, Trace, TraceEvent};
use super::RunStats;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Single-writer state of one sequential percolation iteration.
pub(crate) struct Percolator<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    prev: Option<&'a MarkTable>,
    threshold: u32,
    pub marks: MarkTable,
    pub matching: Matching,
    pub used: SpreadLog,
    queue: CandidateQueue,
    pub stats: RunStats,
    pub trace: Option<Trace>,
}

impl<'a> Percolator<'a> {
    pub fn new(
        g1: &'a Graph,
        g2: &'a Graph,
        prev: Option<&'a MarkTable>,
        threshold: u32,
        tracing: bool,
    ) -> Self {
        Percolator {
            g1,
            g2,
            prev,
            threshold,
            marks: MarkTable::new(),
            matching: Matching::new(g1.vertex_count(), g2.vertex_count()),
            used: SpreadLog::new(),
            queue: CandidateQueue::new(),
            stats: RunStats::default(),
            trace: tracing.then(Trace::new),
        }
    }

    #[inline]
    fn record(&mut self, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event);
        }
    }

    pub fn begin(&mut self, iteration: u32, scoring: Scoring) {
        let threshold = self.threshold;
        self.record(TraceEvent::Begin {
            iteration,
            threshold,
            scoring,
        });
    }

    pub fn place_seed(&mut self, pair: Pair) -> Result<()> {
        self.matching
            .insert(pair)
            .map_err(|e| Error::InvalidSeed(format!("pair {pair} rejected: {e:?}")))?;
        self.record(TraceEvent::Seed(pair));
        Ok(())
    }

    /// Queues every pair whose previous-iteration count already meets the
    /// threshold.
    pub fn seed_queue_from_previous(&mut self) {
        let Some(prev) = self.prev else { return };
        let keys: Vec<ScoreKey> = prev
            .iter()
            .filter(|&(p, c)| c >= self.threshold && self.matching.is_free(p))
            .map(|(p, c)| ScoreKey::new(c.max(self.marks.get(p)), p, self.g1, self.g2))
            .collect();
        for k in keys {
            self.queue.push(k);
        }
    }

    /// Spreads from `pair` unless it already spread this iteration.
    pub fn spread(&mut self, pair: Pair) -> bool {
        if !self.used.insert(pair) {
            return false;
        }
        self.record(TraceEvent::Spread(pair));
        let Percolator {
            g1,
            g2,
            prev,
            threshold,
            marks,
            matching,
            queue,
            stats,
            ..
        } = self;
        let left = g1.adj(pair.u);
        let right = g2.adj(pair.v);
        for &a in left {
            for &b in right {
                let p = Pair { u: a, v: b };
                let count = marks.add(p.key(), 1);
                if count < *threshold || !matching.is_free(p) {
                    continue;
                }
                if let Some(prev) = prev {
                    if count <= prev.get(p) {
                        continue;
                    }
                }
                queue.push(ScoreKey::new(count, p, g1, g2));
            }
        }
        stats.spreads += 1;
        stats.mark_increments += (left.len() * right.len()) as u64;
        true
    }

    pub fn pop_best(&mut self) -> Option<ScoreKey> {
        let Percolator {
            queue,
            matching,
            marks,
            prev,
            ..
        } = self;
        queue.pop_valid(matching, |p| {
            let cur = marks.get(p);
            match prev {
                Some(prev) => cur.max(prev.get(p)),
                None => cur,
            }
        })
    }

    pub fn admit(&mut self, key: ScoreKey) {
        self.matching
            .insert(key.pair)
            .expect("queue only yields free pairs");
        self.stats.steps += 1;
        self.record(TraceEvent::Insert {
            pair: key.pair,
            marks: key.marks,
            degree_gap: key.degree_gap,
        });
    }

    /// Greedy inner loop: admit the best pair and spread from it until no
    /// admissible pair meets the threshold.
    pub fn run_greedy(&mut self) {
        while let Some(key) = self.pop_best() {
            self.admit(key);
            self.spread(key.pair);
        }
    }

    pub fn artificial_seed(&self, cap: Option<usize>) -> ArtificialSeed {
        artificial_seed(
            self.g1,
            self.g2,
            &self.matching,
            &self.used,
            &self.marks,
            cap,
        )
    }
}

/// Noisy restart seed: neighboring pairs of matched pairs that are not in
/// `used` and whose endpoints are both unmatched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArtificialSeed {
    /// Ordered best [`ScoreKey`] first.
    pub pairs: Vec<Pair>,
    /// Candidates available before the cap was applied.
    pub candidates: usize,
    pub capped: bool,
}

pub(crate) fn artificial_seed(
    g1: &Graph,
    g2: &Graph,
    matching: &Matching,
    used: &SpreadLog,
    marks: &MarkTable,
    cap: Option<usize>,
) -> ArtificialSeed {
    let mut seen: FxHashSet<u64> = FxHashSet::default();
    let mut left_free = Vec::new();
    let mut right_free = Vec::new();
    for &m in matching.pairs() {
        left_free.clear();
        left_free.extend(g1.adj(m.u).iter().filter(|&&a| matching.image(a).is_none()));
        if left_free.is_empty() {
            continue;
        }
        right_free.clear();
        right_free.extend(g2.adj(m.v).iter().filter(|&&b| matching.preimage(b).is_none()));
        for &a in &left_free {
            for &b in &right_free {
                let p = Pair { u: a, v: b };
                if !used.contains(p) {
                    seen.insert(p.key());
                }
            }
        }
    }
    let candidates = seen.len();
    let mut keys: Vec<ScoreKey> = seen
        .into_iter()
        .map(|k| {
            let p = Pair::from_key(k);
            ScoreKey::new(marks.get(p), p, g1, g2)
        })
        .collect();
    let mut capped = false;
    if let Some(cap) = cap {
        if keys.len() > cap {
            capped = true;
            if cap == 0 {
                keys.clear();
            } else {
                keys.select_nth_unstable_by(cap - 1, |a, b| b.cmp(a));
                keys.truncate(cap);
            }
        }
    }
    keys.sort_unstable_by(|a, b| b.cmp(a));
    ArtificialSeed {
        pairs: keys.into_iter().map(|k| k.pair).collect(),
        candidates,
        capped,
    }
}
