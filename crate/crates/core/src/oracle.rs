//! Independent checks of the engine: an exhaustive matcher for tiny graphs,
//! a trace replayer, and the statistical harness for the score-gap claim
//! behind repairing iterations.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::{Pair, Scoring, Trace, TraceEvent};
use crate::error::{Error, Result};
use crate::ews::{expand_once, EwsConfig};
use crate::graph::{Graph, VertexId};
use crate::metrics::{mean_stderr, GroundTruth};
use crate::synth::{self, derive_seed, SamplingConfig};

/// Largest vertex count [`brute_force_best_bijection`] accepts.
pub const ORACLE_LIMIT: usize = 8;

/// Maximum-shared-edge injection between two tiny graphs, by exhaustive
/// search over injections from the smaller vertex set. Returns pairs
/// `(g1 vertex, g2 vertex)` sorted by pair and the shared edge count.
pub fn brute_force_best_bijection(g1: &Graph, g2: &Graph) -> Result<(Vec<Pair>, usize)> {
    let largest = g1.vertex_count().max(g2.vertex_count());
    if largest > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            limit: ORACLE_LIMIT,
            got: largest,
        });
    }
    let flipped = g1.vertex_count() > g2.vertex_count();
    let (small, large) = if flipped { (g2, g1) } else { (g1, g2) };
    let mut search = Search {
        small,
        large,
        image: vec![0; small.vertex_count()],
        taken: vec![false; large.vertex_count()],
        best: 0,
        best_image: Vec::new(),
        found: false,
    };
    search.extend(0, 0);
    let mut pairs: Vec<Pair> = search
        .best_image
        .iter()
        .enumerate()
        .map(|(a, &b)| {
            if flipped {
                Pair::new(b, a as u32)
            } else {
                Pair::new(a as u32, b)
            }
        })
        .collect();
    pairs.sort_unstable();
    Ok((pairs, search.best))
}

struct Search<'a> {
    small: &'a Graph,
    large: &'a Graph,
    image: Vec<u32>,
    taken: Vec<bool>,
    best: usize,
    best_image: Vec<u32>,
    found: bool,
}

impl Search<'_> {
    /// `shared` counts preserved edges among the first `depth` vertices.
    fn extend(&mut self, depth: usize, shared: usize) {
        if depth == self.image.len() {
            if !self.found || shared > self.best {
                self.found = true;
                self.best = shared;
                self.best_image = self.image.clone();
            }
            return;
        }
        let a = VertexId(depth as u32);
        for b in 0..self.large.vertex_count() {
            if self.taken[b] {
                continue;
            }
            let gained = self
                .small
                .adj(a)
                .iter()
                .filter(|x| x.index() < depth)
                .filter(|x| {
                    self.large
                        .has_edge(VertexId(b as u32), VertexId(self.image[x.index()]))
                })
                .count();
            self.taken[b] = true;
            self.image[depth] = b as u32;
            self.extend(depth + 1, shared + gained);
            self.taken[b] = false;
        }
    }
}

/// Where a replay first disagreed with the trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Index into `trace.events`.
    pub event: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub passed: bool,
    pub inserts_checked: usize,
    pub spreads: usize,
    pub first_divergence: Option<Divergence>,
}

/// Recomputes mark counts from the spread events of `trace` with plain hash
/// maps and checks every insertion: the pair was free, its claimed marks
/// and degree gap match, it met the threshold, and no other free pair
/// ranked higher. Under immediate scoring the insertions of each spread are
/// re-derived instead.
pub fn replay_check(trace: &Trace, g1: &Graph, g2: &Graph) -> Result<ReplayReport> {
    let mut replay = Replay::new(g1, g2);
    for (index, event) in trace.events.iter().enumerate() {
        if let Err(reason) = replay.step(index, *event)? {
            return Ok(replay.report(Some(Divergence { event: index, reason })));
        }
    }
    if let Some(&(p, _)) = replay.expected.first() {
        let reason = format!("pair {} reached the threshold but was never inserted", fmt(p));
        return Ok(replay.report(Some(Divergence {
            event: trace.events.len(),
            reason,
        })));
    }
    Ok(replay.report(None))
}

type Key = (u32, u32);

fn fmt((u, v): Key) -> String {
    format!("{u}:{v}")
}

struct Replay<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    started: bool,
    threshold: u32,
    scoring: Scoring,
    cur: HashMap<Key, u32>,
    prev: HashMap<Key, u32>,
    left: HashMap<u32, u32>,
    right: HashMap<u32, u32>,
    spread: HashSet<Key>,
    /// Insertions an immediate-mode spread must be followed by.
    expected: Vec<(Key, u32)>,
    inserts_checked: usize,
    spreads: usize,
}

impl<'a> Replay<'a> {
    fn new(g1: &'a Graph, g2: &'a Graph) -> Self {
        Replay {
            g1,
            g2,
            started: false,
            threshold: 0,
            scoring: Scoring::Current,
            cur: HashMap::new(),
            prev: HashMap::new(),
            left: HashMap::new(),
            right: HashMap::new(),
            spread: HashSet::new(),
            expected: Vec::new(),
            inserts_checked: 0,
            spreads: 0,
        }
    }

    fn report(&self, first_divergence: Option<Divergence>) -> ReplayReport {
        ReplayReport {
            passed: first_divergence.is_none(),
            inserts_checked: self.inserts_checked,
            spreads: self.spreads,
            first_divergence,
        }
    }

    fn check_pair(&self, index: usize, p: Pair) -> Result<Key> {
        if p.u.index() >= self.g1.vertex_count() || p.v.index() >= self.g2.vertex_count() {
            return Err(Error::MalformedTrace {
                index,
                reason: format!("pair {p} out of range"),
            });
        }
        Ok((p.u.0, p.v.0))
    }

    fn free(&self, (u, v): Key) -> bool {
        !self.left.contains_key(&u) && !self.right.contains_key(&v)
    }

    fn score(&self, k: Key) -> u32 {
        let cur = self.cur.get(&k).copied().unwrap_or(0);
        let prev = self.prev.get(&k).copied().unwrap_or(0);
        match self.scoring {
            Scoring::Current | Scoring::Immediate => cur,
            Scoring::MaxWithPrevious => cur.max(prev),
            Scoring::PreviousOnly => prev,
        }
    }

    fn gap(&self, (u, v): Key) -> u32 {
        let d1 = self.g1.degree(VertexId(u)) as i64;
        let d2 = self.g2.degree(VertexId(v)) as i64;
        (d1 - d2).unsigned_abs() as u32
    }

    /// Ranking of candidates: marks, then smaller degree gap, then smaller
    /// pair.
    fn rank(&self, k: Key) -> (u32, std::cmp::Reverse<u32>, std::cmp::Reverse<Key>) {
        (self.score(k), std::cmp::Reverse(self.gap(k)), std::cmp::Reverse(k))
    }

    fn best_free(&self) -> Option<Key> {
        let mut keys: Vec<&Key> = Vec::new();
        match self.scoring {
            Scoring::Current | Scoring::Immediate => keys.extend(self.cur.keys()),
            Scoring::PreviousOnly => keys.extend(self.prev.keys()),
            Scoring::MaxWithPrevious => {
                keys.extend(self.cur.keys());
                keys.extend(self.prev.keys());
            }
        }
        keys.into_iter()
            .copied()
            .filter(|&k| self.free(k) && self.score(k) >= self.threshold)
            .max_by_key(|&k| self.rank(k))
    }

    fn match_pair(&mut self, (u, v): Key) {
        self.left.insert(u, v);
        self.right.insert(v, u);
    }

    /// Outer error: malformed trace. Inner error: divergence.
    fn step(&mut self, index: usize, event: TraceEvent) -> Result<Result<(), String>> {
        if !matches!(event, TraceEvent::Insert { .. }) {
            if let Some(&(p, _)) = self.expected.first() {
                return Ok(Err(format!(
                    "pair {} reached the threshold but was not inserted",
                    fmt(p)
                )));
            }
        }
        match event {
            TraceEvent::Begin {
                threshold, scoring, ..
            } => {
                if self.started {
                    self.prev = std::mem::take(&mut self.cur);
                }
                self.started = true;
                self.threshold = threshold;
                self.scoring = scoring;
                self.left.clear();
                self.right.clear();
                self.spread.clear();
                Ok(Ok(()))
            }
            _ if !self.started => Err(Error::MalformedTrace {
                index,
                reason: "event before the first begin".into(),
            }),
            TraceEvent::Seed(p) => {
                let k = self.check_pair(index, p)?;
                if !self.free(k) {
                    return Ok(Err(format!("seed {p} conflicts with the matching")));
                }
                self.match_pair(k);
                Ok(Ok(()))
            }
            TraceEvent::Spread(p) => {
                let k = self.check_pair(index, p)?;
                if !self.spread.insert(k) {
                    return Ok(Err(format!("pair {p} spread twice in one iteration")));
                }
                self.spreads += 1;
                let immediate = self.scoring == Scoring::Immediate;
                let mut claimed: HashSet<u32> = HashSet::new();
                let mut claimed_right: HashSet<u32> = HashSet::new();
                for &a in self.g1.adj(p.u) {
                    for &b in self.g2.adj(p.v) {
                        let slot = self.cur.entry((a.0, b.0)).or_insert(0);
                        *slot += 1;
                        let count = *slot;
                        if immediate
                            && count == self.threshold
                            && self.free((a.0, b.0))
                            && !claimed.contains(&a.0)
                            && !claimed_right.contains(&b.0)
                        {
                            claimed.insert(a.0);
                            claimed_right.insert(b.0);
                            self.expected.push(((a.0, b.0), count));
                        }
                    }
                }
                Ok(Ok(()))
            }
            TraceEvent::Insert {
                pair,
                marks,
                degree_gap,
            } => {
                let k = self.check_pair(index, pair)?;
                self.inserts_checked += 1;
                if !self.free(k) {
                    return Ok(Err(format!("pair {pair} conflicts with the matching")));
                }
                if degree_gap != self.gap(k) {
                    return Ok(Err(format!(
                        "pair {pair} claims degree gap {degree_gap}, replay has {}",
                        self.gap(k)
                    )));
                }
                if self.scoring == Scoring::Immediate {
                    if self.expected.is_empty() {
                        return Ok(Err(format!("pair {pair} inserted without reaching the threshold")));
                    }
                    let (want, count) = self.expected.remove(0);
                    if want != k {
                        return Ok(Err(format!("expected insertion of {}, got {pair}", fmt(want))));
                    }
                    if marks != count {
                        return Ok(Err(format!("pair {pair} claims {marks} marks, replay has {count}")));
                    }
                } else {
                    let score = self.score(k);
                    if marks != score {
                        return Ok(Err(format!("pair {pair} claims {marks} marks, replay has {score}")));
                    }
                    if score < self.threshold {
                        return Ok(Err(format!(
                            "pair {pair} has {score} marks, below threshold {}",
                            self.threshold
                        )));
                    }
                    if let Some(best) = self.best_free() {
                        if best != k {
                            return Ok(Err(format!(
                                "pair {pair} inserted but {} ranks higher with {} marks",
                                fmt(best),
                                self.score(best)
                            )));
                        }
                    }
                }
                self.match_pair(k);
                Ok(Ok(()))
            }
        }
    }
}

/// Settings of the score-gap experiment on `G(n, theta, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremConfig {
    pub n: usize,
    pub theta: f64,
    pub s: f64,
    pub runs: usize,
    pub seed_size: usize,
    pub rng_seed: u64,
    /// One-sided significance level of the gain comparison.
    pub alpha: f64,
    /// Allowed distance, in run-clustered standard errors, between
    /// empirical and predicted per-spreader mark frequencies.
    pub sigma_bound: f64,
    /// Keep every run's trace as TSV in the summary.
    pub keep_traces: bool,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            n: 500,
            theta: 0.02,
            s: 0.7,
            runs: 50,
            seed_size: 40,
            rng_seed: 1,
            alpha: 0.05,
            sigma_bound: 3.0,
            keep_traces: false,
        }
    }
}

/// A wrong pair `[u, v']` admitted while the true pair `[u, v]` was still
/// free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedRecord {
    pub run: usize,
    pub true_pair: Pair,
    pub wrong_pair: Pair,
    /// Spread during which the wrong pair was admitted.
    pub time: usize,
    pub true_marks_at_block: u32,
    pub wrong_marks_at_block: u32,
    pub true_marks_final: u32,
    pub wrong_marks_final: u32,
    /// Correct and wrong spreaders up to and including `time`.
    pub correct_before: usize,
    pub wrong_before: usize,
    /// Correct and wrong spreaders after `time`.
    pub correct_after: usize,
    pub wrong_after: usize,
}

impl BlockedRecord {
    pub fn true_gain(&self) -> i64 {
        i64::from(self.true_marks_final) - i64::from(self.true_marks_at_block)
    }

    pub fn wrong_gain(&self) -> i64 {
        i64::from(self.wrong_marks_final) - i64::from(self.wrong_marks_at_block)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunGapStats {
    pub run: usize,
    pub inserts: usize,
    pub wrong_inserts: usize,
    pub blocked: usize,
    pub mean_true_gain: f64,
    pub mean_wrong_gain: f64,
}

/// Empirical rate at which one kind of spreader marks one kind of pair.
///
/// Trials inside one run share a graph and are not independent, so the
/// gate uses the run-clustered standard error of the ratio estimate. The
/// naive binomial z-score is reported alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCheck {
    pub trials: u64,
    pub hits: u64,
    pub empirical: f64,
    pub predicted: f64,
    pub stderr: f64,
    /// `(empirical - predicted) / stderr`.
    pub z: f64,
    /// z-score under independent Bernoulli trials at the predicted rate.
    pub z_binomial: f64,
    pub within_bound: bool,
}

impl FrequencyCheck {
    /// `per_run` holds `(hits, trials)` for each run.
    fn new(per_run: &[(u64, u64)], predicted: f64, bound: f64) -> Self {
        let hits: u64 = per_run.iter().map(|r| r.0).sum();
        let trials: u64 = per_run.iter().map(|r| r.1).sum();
        let empirical = if trials > 0 { hits as f64 / trials as f64 } else { 0.0 };
        let k = per_run.len() as f64;
        let stderr = if k >= 2.0 && trials > 0 {
            let mean_trials = trials as f64 / k;
            let ss: f64 = per_run
                .iter()
                .map(|&(h, t)| (h as f64 - empirical * t as f64).powi(2))
                .sum();
            (ss / (k * (k - 1.0))).sqrt() / mean_trials
        } else {
            0.0
        };
        let z = if stderr > 0.0 { (empirical - predicted) / stderr } else { 0.0 };
        let sigma = (predicted * (1.0 - predicted) / trials.max(1) as f64).sqrt();
        let z_binomial = if sigma > 0.0 { (empirical - predicted) / sigma } else { 0.0 };
        FrequencyCheck {
            trials,
            hits,
            empirical,
            predicted,
            stderr,
            z,
            z_binomial,
            within_bound: trials > 0 && stderr > 0.0 && z.abs() <= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub config: TheoremConfig,
    pub blocked: usize,
    /// Too few blocked pairs to test anything.
    pub inconclusive: bool,
    pub mean_true_gain: f64,
    pub mean_wrong_gain: f64,
    /// Mean of `marks(p) - marks(p')` when `p'` was admitted.
    pub mean_gap_at_block: f64,
    pub mean_gap_final: f64,
    /// Fraction of records whose final gap favors the true pair.
    pub final_gap_favors_true: f64,
    /// Paired one-sided t-test of true gain over wrong gain.
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    /// A correct spreader marks the true pair (predicted `s²θ`).
    pub correct_marks_true: FrequencyCheck,
    /// A correct spreader marks the wrong pair (predicted `s²θ²`).
    pub correct_marks_wrong: FrequencyCheck,
    /// Records where `Λ̄_t ≥ 1`, and among them how many violate
    /// `Λ̄_t s²θ(1-θ) - s²θ² > 0`.
    pub sign_checks: usize,
    pub sign_violations: usize,
    pub inserts: usize,
    pub wrong_inserts: usize,
    pub wrong_insert_fraction: f64,
    pub runs: Vec<RunGapStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<String>>,
}

struct RunOutcome {
    records: Vec<BlockedRecord>,
    stats: RunGapStats,
    /// `(trials, hits on p, hits on p')` over correct spreaders after `t`.
    correct_trials: (u64, u64, u64),
    trace: Option<String>,
}

/// Runs ExpandOnce `runs` times on fresh `G(n, theta, s)` instances and
/// compares, for every wrong admission that blocked a free true pair, the
/// marks each pair collects afterwards.
pub fn theorem1_experiment(cfg: &TheoremConfig) -> Result<TheoremSummary> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    if !(cfg.theta > 0.0 && cfg.theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta {} outside (0,1)", cfg.theta)));
    }
    let outcomes: Vec<RunOutcome> = map_runs(cfg.runs, |run| theorem_run(cfg, run))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, outcomes))
}

#[cfg(feature = "parallel")]
fn map_runs<T: Send>(runs: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..runs).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_runs<T>(runs: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..runs).map(f).collect()
}

fn theorem_run(cfg: &TheoremConfig, run: usize) -> Result<RunOutcome> {
    let stream = 4 * run as u64;
    let source = synth::erdos_renyi(cfg.n, cfg.theta, derive_seed(cfg.rng_seed, stream))?;
    let mut sampling = SamplingConfig::new(cfg.s, derive_seed(cfg.rng_seed, stream + 1));
    sampling.relabel = true;
    let mut inst = synth::sample_pair(&source, "er", sampling)?;
    let size = cfg.seed_size.min(inst.truth.len());
    inst.reseed(size, derive_seed(cfg.rng_seed, stream + 2))?;
    let ews = EwsConfig {
        trace: true,
        ..EwsConfig::default()
    };
    let result = expand_once(&inst.g1, &inst.g2, &inst.seed, derive_seed(cfg.rng_seed, stream + 3), &ews)?;
    let trace = result.trace.expect("tracing enabled");
    let analysis = analyze_trace(&trace, &inst.g1, &inst.g2, &inst.truth, run);
    let records = analysis.records;
    let gains = |f: fn(&BlockedRecord) -> i64| {
        let v: Vec<f64> = records.iter().map(|r| f(r) as f64).collect();
        mean_stderr(&v).0
    };
    let stats = RunGapStats {
        run,
        inserts: analysis.inserts,
        wrong_inserts: analysis.wrong_inserts,
        blocked: records.len(),
        mean_true_gain: gains(BlockedRecord::true_gain),
        mean_wrong_gain: gains(BlockedRecord::wrong_gain),
    };
    Ok(RunOutcome {
        correct_trials: analysis.correct_trials,
        stats,
        trace: cfg.keep_traces.then(|| trace.to_tsv(Some(&inst.truth))),
        records,
    })
}

struct TraceAnalysis {
    records: Vec<BlockedRecord>,
    inserts: usize,
    wrong_inserts: usize,
    correct_trials: (u64, u64, u64),
}

/// Extracts blocked records from an ExpandOnce trace. Marks are replayed
/// spread by spread, so "at block time" means at the end of the spread
/// that admitted the wrong pair.
fn analyze_trace(trace: &Trace, g1: &Graph, g2: &Graph, truth: &GroundTruth, run: usize) -> TraceAnalysis {
    let mut marks: HashMap<Key, u32> = HashMap::new();
    let mut left: HashSet<u32> = HashSet::new();
    let mut right: HashSet<u32> = HashSet::new();
    let mut spreaders: Vec<(Pair, bool)> = Vec::new();
    let mut open: Vec<BlockedRecord> = Vec::new();
    let mut inserts = 0;
    let mut wrong_inserts = 0;
    let get = |m: &HashMap<Key, u32>, p: Pair| m.get(&(p.u.0, p.v.0)).copied().unwrap_or(0);
    for event in &trace.events {
        match *event {
            TraceEvent::Begin { .. } => {}
            TraceEvent::Seed(p) => {
                left.insert(p.u.0);
                right.insert(p.v.0);
            }
            TraceEvent::Spread(p) => {
                spreaders.push((p, truth.contains(p)));
                for &a in g1.adj(p.u) {
                    for &b in g2.adj(p.v) {
                        *marks.entry((a.0, b.0)).or_insert(0) += 1;
                    }
                }
            }
            TraceEvent::Insert { pair, .. } => {
                inserts += 1;
                let correct = truth.contains(pair);
                if !correct {
                    wrong_inserts += 1;
                    if let Some(v) = truth.image(pair.u) {
                        if !right.contains(&v.0) {
                            let true_pair = Pair { u: pair.u, v };
                            let time = spreaders.len().saturating_sub(1);
                            let correct_before = spreaders.iter().filter(|s| s.1).count();
                            open.push(BlockedRecord {
                                run,
                                true_pair,
                                wrong_pair: pair,
                                time,
                                true_marks_at_block: get(&marks, true_pair),
                                wrong_marks_at_block: get(&marks, pair),
                                true_marks_final: 0,
                                wrong_marks_final: 0,
                                correct_before,
                                wrong_before: spreaders.len() - correct_before,
                                correct_after: 0,
                                wrong_after: 0,
                            });
                        }
                    }
                }
                left.insert(pair.u.0);
                right.insert(pair.v.0);
            }
        }
    }
    let mut trials = (0u64, 0u64, 0u64);
    for r in &mut open {
        r.true_marks_final = get(&marks, r.true_pair);
        r.wrong_marks_final = get(&marks, r.wrong_pair);
        for &(sp, correct) in &spreaders[r.time + 1..] {
            if !correct {
                r.wrong_after += 1;
                continue;
            }
            r.correct_after += 1;
            let near_u = g1.has_edge(sp.u, r.true_pair.u);
            trials.0 += 1;
            if near_u && g2.has_edge(sp.v, r.true_pair.v) {
                trials.1 += 1;
            }
            if near_u && g2.has_edge(sp.v, r.wrong_pair.v) {
                trials.2 += 1;
            }
        }
    }
    TraceAnalysis {
        records: open,
        inserts,
        wrong_inserts,
        correct_trials: trials,
    }
}

fn summarize(cfg: &TheoremConfig, outcomes: Vec<RunOutcome>) -> TheoremSummary {
    let mut records = Vec::new();
    let mut runs = Vec::new();
    let mut traces = Vec::new();
    let mut marks_true = Vec::new();
    let mut marks_wrong = Vec::new();
    for o in outcomes {
        records.extend(o.records);
        runs.push(o.stats);
        if let Some(t) = o.trace {
            traces.push(t);
        }
        let (trials, on_true, on_wrong) = o.correct_trials;
        marks_true.push((on_true, trials));
        marks_wrong.push((on_wrong, trials));
    }
    let inserts: usize = runs.iter().map(|r| r.inserts).sum();
    let wrong_inserts: usize = runs.iter().map(|r| r.wrong_inserts).sum();

    let as_f64 = |f: &dyn Fn(&BlockedRecord) -> i64| -> Vec<f64> { records.iter().map(|r| f(r) as f64).collect() };
    let true_gain = as_f64(&|r| r.true_gain());
    let wrong_gain = as_f64(&|r| r.wrong_gain());
    let gap_block = as_f64(&|r| i64::from(r.true_marks_at_block) - i64::from(r.wrong_marks_at_block));
    let gap_final = as_f64(&|r| i64::from(r.true_marks_final) - i64::from(r.wrong_marks_final));
    let diffs: Vec<f64> = true_gain.iter().zip(&wrong_gain).map(|(a, b)| a - b).collect();
    let favors = records
        .iter()
        .filter(|r| r.true_marks_final > r.wrong_marks_final)
        .count();

    let (t_statistic, p_value) = paired_one_sided(&diffs);
    let inconclusive = records.len() < 2;

    let s2 = cfg.s * cfg.s;
    let mut sign_checks = 0;
    let mut sign_violations = 0;
    for r in &records {
        if r.correct_after >= 1 {
            sign_checks += 1;
            let lhs = r.correct_after as f64 * s2 * cfg.theta * (1.0 - cfg.theta) - s2 * cfg.theta * cfg.theta;
            if !(lhs > 0.0) {
                sign_violations += 1;
            }
        }
    }
    TheoremSummary {
        config: *cfg,
        blocked: records.len(),
        inconclusive,
        mean_true_gain: mean_stderr(&true_gain).0,
        mean_wrong_gain: mean_stderr(&wrong_gain).0,
        mean_gap_at_block: mean_stderr(&gap_block).0,
        mean_gap_final: mean_stderr(&gap_final).0,
        final_gap_favors_true: if records.is_empty() {
            0.0
        } else {
            favors as f64 / records.len() as f64
        },
        t_statistic,
        p_value,
        significant: !inconclusive && p_value < cfg.alpha,
        correct_marks_true: FrequencyCheck::new(&marks_true, s2 * cfg.theta, cfg.sigma_bound),
        correct_marks_wrong: FrequencyCheck::new(&marks_wrong, s2 * cfg.theta * cfg.theta, cfg.sigma_bound),
        sign_checks,
        sign_violations,
        inserts,
        wrong_inserts,
        wrong_insert_fraction: if inserts == 0 {
            0.0
        } else {
            wrong_inserts as f64 / inserts as f64
        },
        runs,
        traces: cfg.keep_traces.then_some(traces),
    }
}

/// One-sided test of `mean(diffs) > 0`. Returns `(t, p)`.
fn paired_one_sided(diffs: &[f64]) -> (f64, f64) {
    let n = diffs.len();
    if n < 2 {
        return (0.0, 1.0);
    }
    let (mean, stderr) = mean_stderr(diffs);
    if stderr == 0.0 {
        return if mean > 0.0 { (f64::INFINITY, 0.0) } else { (0.0, 1.0) };
    }
    let t = mean / stderr;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("n >= 2");
    (t, 1.0 - dist.cdf(t))
}
