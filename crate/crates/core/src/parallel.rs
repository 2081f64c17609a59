//! Epoch-parallel percolation and repair.
//!
//! An epoch admits, in [`ScoreKey`] order, every free pair that meets the
//! threshold on the marks frozen at the start of the epoch, without
//! spreading. All newly admitted pairs then spread at once. The spread set
//! is split into contiguous chunks, one per worker; each worker counts its
//! increments in a private table and the tables are summed afterwards.
//! Integer addition commutes, so the merged table, and everything decided
//! from it, does not depend on the number of workers.

use serde::{Deserialize, Serialize};

use crate::engine::percolator::artificial_seed;
use crate::engine::{
    artificial_cap, validate_seed, weight, MarkTable, Matching, Pair, RunStats, ScoreKey, Scoring,
    SpreadLog, Trace, TraceEvent,
};
use crate::error::{Error, Result};
use crate::ews::{EwsConfig, EwsResult, MARK_THRESHOLD};
use crate::graph::Graph;
use crate::irma::{drive, IrmaConfig, IrmaRun, IterationKind, IterationSnapshot, Step, EXPLORE_THRESHOLD};
use crate::metrics::GroundTruth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelConfig {
    pub workers: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        ParallelConfig { workers: 1 }
    }
}

/// Runs the map phase of a simultaneous spread.
struct SpreadPool {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl SpreadPool {
    fn new(cfg: &ParallelConfig) -> Result<Self> {
        if cfg.workers == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        #[cfg(feature = "parallel")]
        let pool = if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(SpreadPool {
            workers: cfg.workers,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    /// Adds the marks spread by every pair in `spreaders` to `table`.
    fn spread_all(&self, g1: &Graph, g2: &Graph, spreaders: &[Pair], table: &mut MarkTable) -> u64 {
        if spreaders.is_empty() {
            return 0;
        }
        if self.workers == 1 {
            let mut increments = 0;
            for &p in spreaders {
                increments += spread_into(g1, g2, p, table);
            }
            return increments;
        }
        let chunk = spreaders.len().div_ceil(self.workers);
        let work = |part: &[Pair]| -> (MarkTable, u64) {
            let mut local = MarkTable::new();
            let mut increments = 0;
            for &p in part {
                increments += spread_into(g1, g2, p, &mut local);
            }
            (local, increments)
        };
        let locals: Vec<(MarkTable, u64)> = self.map_chunks(spreaders, chunk, work);
        let mut increments = 0;
        for (local, inc) in locals {
            increments += inc;
            table.merge(&local);
        }
        increments
    }

    #[cfg(feature = "parallel")]
    fn map_chunks<T: Send>(
        &self,
        spreaders: &[Pair],
        chunk: usize,
        work: impl Fn(&[Pair]) -> T + Sync + Send,
    ) -> Vec<T> {
        use rayon::prelude::*;
        match &self.pool {
            Some(pool) => pool.install(|| spreaders.par_chunks(chunk).map(&work).collect()),
            None => spreaders.chunks(chunk).map(work).collect(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn map_chunks<T>(&self, spreaders: &[Pair], chunk: usize, work: impl Fn(&[Pair]) -> T) -> Vec<T> {
        spreaders.chunks(chunk).map(work).collect()
    }
}

fn spread_into(g1: &Graph, g2: &Graph, pair: Pair, table: &mut MarkTable) -> u64 {
    let left = g1.adj(pair.u);
    let right = g2.adj(pair.v);
    for &a in left {
        let high = u64::from(a.0) << 32;
        for &b in right {
            table.add(high | u64::from(b.0), 1);
        }
    }
    (left.len() * right.len()) as u64
}

struct EpochState<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    marks: MarkTable,
    matching: Matching,
    used: SpreadLog,
    stats: RunStats,
    trace: Option<Trace>,
}

impl<'a> EpochState<'a> {
    fn new(g1: &'a Graph, g2: &'a Graph, tracing: bool) -> Self {
        EpochState {
            g1,
            g2,
            marks: MarkTable::new(),
            matching: Matching::new(g1.vertex_count(), g2.vertex_count()),
            used: SpreadLog::new(),
            stats: RunStats::default(),
            trace: tracing.then(Trace::new),
        }
    }

    fn record(&mut self, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event);
        }
    }

    fn place_seed(&mut self, seed: &[Pair]) {
        for &p in seed {
            self.matching.insert(p).expect("seed validated");
            self.record(TraceEvent::Seed(p));
        }
    }

    /// Admits free pairs meeting `threshold` in `source`, best first.
    fn admit_all(&mut self, source: Option<&MarkTable>, threshold: u32) -> Vec<Pair> {
        let table = source.unwrap_or(&self.marks);
        let mut keys: Vec<ScoreKey> = table
            .iter()
            .filter(|&(p, c)| c >= threshold && self.matching.is_free(p))
            .map(|(p, c)| ScoreKey::new(c, p, self.g1, self.g2))
            .collect();
        keys.sort_unstable_by(|a, b| b.cmp(a));
        let mut admitted = Vec::new();
        for k in keys {
            if self.matching.is_free(k.pair) {
                self.matching.insert(k.pair).expect("checked free");
                self.stats.steps += 1;
                self.record(TraceEvent::Insert {
                    pair: k.pair,
                    marks: k.marks,
                    degree_gap: k.degree_gap,
                });
                admitted.push(k.pair);
            }
        }
        admitted
    }

    /// Spreads from every pair of `pairs` not used before.
    fn spread(&mut self, pool: &SpreadPool, pairs: &[Pair]) {
        let mut fresh = Vec::with_capacity(pairs.len());
        for &p in pairs {
            if self.used.insert(p) {
                fresh.push(p);
                self.record(TraceEvent::Spread(p));
            }
        }
        let increments = pool.spread_all(self.g1, self.g2, &fresh, &mut self.marks);
        self.stats.spreads += fresh.len();
        self.stats.mark_increments += increments;
    }
}

/// Epoch-parallel ExpandWhenStuck. When an epoch admits nothing, an
/// artificial seed is built and spread exactly as in the sequential
/// algorithm.
pub fn parallel_ews(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    cfg: &EwsConfig,
    par: &ParallelConfig,
) -> Result<EwsResult> {
    validate_seed(g1, g2, seed)?;
    let pool = SpreadPool::new(par)?;
    parallel_ews_with(g1, g2, seed, cfg, &pool, 0)
}

fn parallel_ews_with(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    cfg: &EwsConfig,
    pool: &SpreadPool,
    iteration: u32,
) -> Result<EwsResult> {
    let cap = artificial_cap(cfg.artificial_cap_factor, g1.vertex_count());
    let mut st = EpochState::new(g1, g2, cfg.trace);
    st.record(TraceEvent::Begin {
        iteration,
        threshold: MARK_THRESHOLD,
        scoring: Scoring::Current,
    });
    st.place_seed(seed);
    let mut restart = seed.to_vec();
    let mut first = true;
    while !restart.is_empty() {
        st.spread(pool, &restart);
        if !first {
            st.stats.artificial_rounds += 1;
            st.stats.artificial_pairs += restart.len();
        }
        first = false;
        loop {
            let admitted = st.admit_all(None, MARK_THRESHOLD);
            if admitted.is_empty() {
                break;
            }
            st.stats.epochs += 1;
            st.spread(pool, &admitted);
        }
        let next = artificial_seed(g1, g2, &st.matching, &st.used, &st.marks, cap);
        if next.capped {
            st.stats.cap_hits += 1;
        }
        restart = next.pairs;
    }
    Ok(EwsResult {
        matching: st.matching,
        marks: st.marks,
        used: st.used,
        stats: st.stats,
        trace: st.trace,
    })
}

fn parallel_repair_step(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    prev_marks: &MarkTable,
    threshold: u32,
    pool: &SpreadPool,
    iteration: u32,
    tracing: bool,
) -> Step {
    let mut st = EpochState::new(g1, g2, tracing);
    st.record(TraceEvent::Begin {
        iteration,
        threshold,
        scoring: Scoring::PreviousOnly,
    });
    st.place_seed(seed);
    st.admit_all(Some(prev_marks), threshold);
    st.stats.epochs = 1;
    let everything = st.matching.pairs().to_vec();
    st.spread(pool, &everything);
    Step {
        matching: st.matching,
        marks: st.marks,
        stats: st.stats,
        trace: st.trace,
    }
}

/// Parallel repairing iteration: admit greedily from the previous
/// iteration's marks alone, then spread from the whole matching at once to
/// produce the marks for the next iteration.
pub fn parallel_repairing_iteration(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    prev_marks: &MarkTable,
    threshold: u32,
    par: &ParallelConfig,
) -> Result<IterationSnapshot> {
    if !matches!(threshold, 1 | 2) {
        return Err(Error::InvalidThreshold(threshold));
    }
    validate_seed(g1, g2, seed)?;
    let pool = SpreadPool::new(par)?;
    let step = parallel_repair_step(g1, g2, seed, prev_marks, threshold, &pool, 0, false);
    Ok(IterationSnapshot {
        index: 0,
        kind: if threshold == EXPLORE_THRESHOLD {
            IterationKind::Explore
        } else {
            IterationKind::Repair
        },
        threshold,
        weight: weight(g1, g2, &step.matching),
        matching: step.matching,
        marks: Some(step.marks),
        metrics: None,
        stats: step.stats,
    })
}

/// Parallel IRMA: parallel ExpandWhenStuck followed by parallel repairing
/// iterations under the same schedule as [`crate::irma::irma`].
pub fn parallel_irma(
    g1: &Graph,
    g2: &Graph,
    seed: &[Pair],
    cfg: &IrmaConfig,
    par: &ParallelConfig,
    truth: Option<&GroundTruth>,
) -> Result<IrmaRun> {
    cfg.validate()?;
    validate_seed(g1, g2, seed)?;
    let pool = SpreadPool::new(par)?;
    let tracing = cfg.ews.trace;
    drive(
        g1,
        g2,
        cfg,
        truth,
        || {
            let r = parallel_ews_with(g1, g2, seed, &cfg.ews, &pool, 0)?;
            Ok(Step {
                matching: r.matching,
                marks: r.marks,
                stats: r.stats,
                trace: r.trace,
            })
        },
        |prev, threshold, index| {
            Ok(parallel_repair_step(g1, g2, seed, prev, threshold, &pool, index, tracing))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ews::expand_when_stuck;

    fn grid(w: u32, h: u32) -> Graph {
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    edges.push((v, v + 1));
                }
                if y + 1 < h {
                    edges.push((v, v + w));
                }
            }
        }
        Graph::from_edges((w * h) as usize, &edges).unwrap()
    }

    #[test]
    fn zero_workers_is_an_error() {
        let g = grid(3, 3);
        let par = ParallelConfig { workers: 0 };
        assert!(parallel_ews(&g, &g, &[Pair::new(0, 0)], &EwsConfig::default(), &par).is_err());
    }

    #[test]
    fn chunked_spread_equals_single_table() {
        let g = grid(5, 4);
        let spreaders: Vec<Pair> = (0..20).map(|i| Pair::new(i, (i * 7) % 20)).collect();
        let mut one = MarkTable::new();
        let inc1 = SpreadPool::new(&ParallelConfig { workers: 1 })
            .unwrap()
            .spread_all(&g, &g, &spreaders, &mut one);
        for workers in [2, 3, 8] {
            let mut many = MarkTable::new();
            let inc = SpreadPool::new(&ParallelConfig { workers })
                .unwrap()
                .spread_all(&g, &g, &spreaders, &mut many);
            assert_eq!(inc, inc1);
            assert_eq!(many.sorted_entries(), one.sorted_entries());
        }
    }

    #[test]
    fn grid_identity_is_recovered() {
        let g = grid(6, 6);
        let seed = [Pair::new(0, 0), Pair::new(1, 1), Pair::new(6, 6)];
        let par = parallel_ews(&g, &g, &seed, &EwsConfig::default(), &ParallelConfig { workers: 4 }).unwrap();
        let seq = expand_when_stuck(&g, &g, &seed, &EwsConfig::default()).unwrap();
        assert_eq!(par.matching.len(), 36);
        assert_eq!(weight(&g, &g, &par.matching), weight(&g, &g, &seq.matching));
        assert!(par.stats.epochs >= 1);
    }

    #[test]
    fn repair_threshold_is_checked() {
        let g = grid(2, 2);
        let par = ParallelConfig::default();
        assert!(parallel_repairing_iteration(&g, &g, &[], &MarkTable::new(), 0, &par).is_err());
    }
}

