//! Parameter sweeps over overlap and seed size, with CSV output.
//!
//! A plan is a grid of cells `(s, seed size, repetition)`. Every cell builds
//! one instance from its own random stream and runs each requested
//! algorithm on it. Cells run in parallel; rows are written afterwards in
//! grid order by a single writer, so `results.csv` only depends on the plan.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::RunStats;
use crate::error::{Error, Result};
use crate::ews::{expand_when_stuck, EwsConfig};
use crate::graph::{read_edge_list, Graph};
use crate::irma::{irma, IrmaConfig, IrmaRun};
use crate::metrics::{mean_stderr, score_matching, MetricsReport};
use crate::parallel::{parallel_ews, parallel_irma, ParallelConfig};
use crate::synth::{self, derive_seed, Instance, SamplingConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    /// `G(n, p)` with `p = mean_degree / (n - 1)`.
    Er { n: usize, mean_degree: f64 },
    Ba { n: usize, m: usize },
    EdgeList { path: PathBuf },
}

impl SourceSpec {
    fn name(&self) -> String {
        match self {
            SourceSpec::Er { n, mean_degree } => format!("er(n={n},deg={mean_degree})"),
            SourceSpec::Ba { n, m } => format!("ba(n={n},m={m})"),
            SourceSpec::EdgeList { path } => path.display().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ews,
    Irma,
    ParallelEws,
    ParallelIrma,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ews => "ews",
            Algorithm::Irma => "irma",
            Algorithm::ParallelEws => "parallel-ews",
            Algorithm::ParallelIrma => "parallel-irma",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "ews" => Algorithm::Ews,
            "irma" => Algorithm::Irma,
            "parallel-ews" => Algorithm::ParallelEws,
            "parallel-irma" => Algorithm::ParallelIrma,
            _ => return None,
        })
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Ews, Algorithm::Irma]
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_true() -> bool {
    true
}

fn default_workers() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub source: SourceSpec,
    pub s_values: Vec<f64>,
    pub seed_sizes: Vec<usize>,
    pub repetitions: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub irma: IrmaConfig,
    /// Worker count of the parallel algorithms.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_true")]
    pub relabel: bool,
}

impl ExperimentPlan {
    /// Reads a plan from TOML (`.toml`) or JSON (anything else).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let plan: ExperimentPlan = if is_toml {
            toml::from_str(&text).map_err(|e| Error::Parse {
                source_name: path.display().to_string(),
                line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
                reason: e.message().to_owned(),
            })?
        } else {
            serde_json::from_str(&text)?
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.repetitions < 1 {
            return bad("repetitions must be >= 1".into());
        }
        if self.s_values.is_empty() || self.seed_sizes.is_empty() || self.algorithms.is_empty() {
            return bad("s_values, seed_sizes and algorithms must be non-empty".into());
        }
        if let Some(s) = self.s_values.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
            return bad(format!("overlap s={s} outside (0,1]"));
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        match &self.source {
            SourceSpec::Er { n, mean_degree } if *n < 2 || !(*mean_degree >= 0.0) => {
                return bad(format!("bad ER source n={n} mean_degree={mean_degree}"))
            }
            SourceSpec::Ba { n, m } if *m == 0 || m >= n => return bad(format!("bad BA source n={n} m={m}")),
            _ => {}
        }
        self.irma.validate()
    }

    /// Hash identifying the configuration an algorithm ran with.
    pub fn config_hash(&self, algo: Algorithm) -> String {
        let workers = matches!(algo, Algorithm::ParallelEws | Algorithm::ParallelIrma).then_some(self.workers);
        let ews = matches!(algo, Algorithm::Ews | Algorithm::ParallelEws).then_some(self.irma.ews);
        let irma = matches!(algo, Algorithm::Irma | Algorithm::ParallelIrma).then_some(self.irma);
        let desc = serde_json::json!({
            "algo": algo.as_str(),
            "ews": ews,
            "irma": irma,
            "workers": workers,
            "relabel": self.relabel,
        });
        let digest = Sha256::digest(desc.to_string().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// One row of `results.csv`: a snapshot of one algorithm run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell: usize,
    pub algo: String,
    pub s: f64,
    pub seed_size: usize,
    pub rep: usize,
    pub instance_rng: u64,
    pub config_hash: String,
    pub iteration: usize,
    pub kind: String,
    pub threshold: u32,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub weight: usize,
    pub matched: usize,
    pub correct: usize,
    pub truth: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub weight_per_pair: f64,
    pub reachable_recall: f64,
    pub spreads: usize,
    pub mark_increments: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algo: String,
    pub s: f64,
    pub seed_size: usize,
    pub runs: usize,
    pub f1_mean: f64,
    pub f1_stderr: f64,
    pub precision_mean: f64,
    pub precision_stderr: f64,
    pub recall_mean: f64,
    pub recall_stderr: f64,
    pub weight_mean: f64,
    pub iterations_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub cell: usize,
    pub s: f64,
    pub seed_size: usize,
    pub rep: usize,
    pub algo: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TimingRow {
    cell: usize,
    algo: String,
    rep: usize,
    seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub output: PathBuf,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub errors: Vec<CellError>,
}

impl PlanOutcome {
    /// 0 when every cell succeeded, 2 when some failed.
    pub fn exit_code(&self) -> i32 {
        if self.errors.is_empty() {
            0
        } else {
            2
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    index: usize,
    s: f64,
    seed_size: usize,
    rep: usize,
    instance_rng: u64,
}

struct CellOutput {
    rows: Vec<ResultRow>,
    timings: Vec<TimingRow>,
    errors: Vec<CellError>,
}

fn grid(plan: &ExperimentPlan) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (si, &s) in plan.s_values.iter().enumerate() {
        for (ki, &seed_size) in plan.seed_sizes.iter().enumerate() {
            for rep in 0..plan.repetitions {
                let stream = ((si as u64) << 40) | ((ki as u64) << 20) | rep as u64;
                cells.push(Cell {
                    index: cells.len(),
                    s,
                    seed_size,
                    rep,
                    instance_rng: derive_seed(plan.rng_seed, stream),
                });
            }
        }
    }
    cells
}

/// Builds the instance of a cell: source graph, sampled pair, seed.
pub fn build_instance(plan: &ExperimentPlan, base: Option<&Graph>, s: f64, seed_size: usize, instance_rng: u64) -> Result<Instance> {
    let generated;
    let source = match (&plan.source, base) {
        (_, Some(g)) => g,
        (SourceSpec::Er { n, mean_degree }, None) => {
            generated = synth::erdos_renyi(*n, mean_degree / (*n as f64 - 1.0), derive_seed(instance_rng, 0))?;
            &generated
        }
        (SourceSpec::Ba { n, m }, None) => {
            generated = synth::barabasi_albert(*n, *m, derive_seed(instance_rng, 0))?;
            &generated
        }
        (SourceSpec::EdgeList { path }, None) => {
            generated = load_edge_list(path)?;
            &generated
        }
    };
    let cfg = SamplingConfig {
        s,
        rng_seed: derive_seed(instance_rng, 1),
        relabel: plan.relabel,
    };
    let mut inst = synth::sample_pair(source, &plan.source.name(), cfg)?;
    inst.reseed(seed_size, derive_seed(instance_rng, 2))?;
    Ok(inst)
}

fn load_edge_list(path: &Path) -> Result<Graph> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_edge_list(BufReader::new(file), &path.display().to_string())
}

fn snapshot_rows(cell: &Cell, algo: Algorithm, hash: &str, run: &IrmaRun) -> Vec<ResultRow> {
    run.snapshots
        .iter()
        .map(|snap| {
            let m = snap.metrics.as_ref().expect("runs are scored");
            row(cell, algo, hash, snap.index, snap.kind.as_str(), snap.threshold, snap.index == run.final_index, m, &snap.stats)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn row(
    cell: &Cell,
    algo: Algorithm,
    hash: &str,
    iteration: usize,
    kind: &str,
    threshold: u32,
    is_final: bool,
    m: &MetricsReport,
    stats: &RunStats,
) -> ResultRow {
    ResultRow {
        cell: cell.index,
        algo: algo.as_str().to_owned(),
        s: cell.s,
        seed_size: cell.seed_size,
        rep: cell.rep,
        instance_rng: cell.instance_rng,
        config_hash: hash.to_owned(),
        iteration,
        kind: kind.to_owned(),
        threshold,
        is_final,
        weight: m.weight,
        matched: m.matched_count,
        correct: m.correct_count,
        truth: m.truth_count,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        weight_per_pair: m.weight_per_pair,
        reachable_recall: m.reachable_recall,
        spreads: stats.spreads,
        mark_increments: stats.mark_increments,
    }
}

fn run_algorithm(plan: &ExperimentPlan, inst: &Instance, cell: &Cell, algo: Algorithm) -> Result<Vec<ResultRow>> {
    let hash = plan.config_hash(algo);
    let par = ParallelConfig { workers: plan.workers };
    let ews_cfg: EwsConfig = plan.irma.ews;
    let (g1, g2, seed, truth) = (&inst.g1, &inst.g2, &inst.seed[..], &inst.truth);
    Ok(match algo {
        Algorithm::Ews | Algorithm::ParallelEws => {
            let r = if algo == Algorithm::Ews {
                expand_when_stuck(g1, g2, seed, &ews_cfg)?
            } else {
                parallel_ews(g1, g2, seed, &ews_cfg, &par)?
            };
            let m = score_matching(&r.matching, truth, g1, g2);
            vec![row(cell, algo, &hash, 0, "initial", 2, true, &m, &r.stats)]
        }
        Algorithm::Irma => snapshot_rows(cell, algo, &hash, &irma(g1, g2, seed, &plan.irma, Some(truth))?),
        Algorithm::ParallelIrma => {
            snapshot_rows(cell, algo, &hash, &parallel_irma(g1, g2, seed, &plan.irma, &par, Some(truth))?)
        }
    })
}

fn run_cell(plan: &ExperimentPlan, base: Option<&Result<Graph>>, cell: &Cell) -> CellOutput {
    let mut out = CellOutput {
        rows: Vec::new(),
        timings: Vec::new(),
        errors: Vec::new(),
    };
    let error = |algo: &str, e: &dyn std::fmt::Display| CellError {
        cell: cell.index,
        s: cell.s,
        seed_size: cell.seed_size,
        rep: cell.rep,
        algo: algo.to_owned(),
        error: e.to_string(),
    };
    let inst = match base {
        Some(Err(e)) => Err(e.to_string()),
        Some(Ok(g)) => build_instance(plan, Some(g), cell.s, cell.seed_size, cell.instance_rng).map_err(|e| e.to_string()),
        None => build_instance(plan, None, cell.s, cell.seed_size, cell.instance_rng).map_err(|e| e.to_string()),
    };
    let inst = match inst {
        Ok(i) => i,
        Err(e) => {
            out.errors.push(error("instance", &e));
            return out;
        }
    };
    for &algo in &plan.algorithms {
        let start = Instant::now();
        match run_algorithm(plan, &inst, cell, algo) {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => out.errors.push(error(algo.as_str(), &e)),
        }
        out.timings.push(TimingRow {
            cell: cell.index,
            algo: algo.as_str().to_owned(),
            rep: cell.rep,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    out
}

#[cfg(feature = "parallel")]
fn map_cells<T: Send>(cells: &[Cell], f: impl Fn(&Cell) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    cells.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cells<T>(cells: &[Cell], f: impl Fn(&Cell) -> T) -> Vec<T> {
    cells.iter().map(f).collect()
}

/// Runs every cell of `plan` and writes `results.csv`, `summary.csv`,
/// `errors.csv`, `timings.csv` and `meta.json` into `plan.output`.
/// Failed cells are recorded and skipped; only an invalid plan or an
/// unwritable output directory is an error.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanOutcome> {
    plan.validate()?;
    let cells = grid(plan);
    // An edge-list source is read once and shared by all cells.
    let base = match &plan.source {
        SourceSpec::EdgeList { path } => Some(load_edge_list(path)),
        _ => None,
    };
    let outputs = map_cells(&cells, |c| run_cell(plan, base.as_ref(), c));

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut errors = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        timings.extend(o.timings);
        errors.extend(o.errors);
    }
    let summary = summarize(&rows);

    let dir = &plan.output;
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    write_csv(&dir.join("results.csv"), &rows, RESULT_HEADER)?;
    write_csv(&dir.join("summary.csv"), &summary, SUMMARY_HEADER)?;
    write_csv(&dir.join("errors.csv"), &errors, ERROR_HEADER)?;
    write_csv(&dir.join("timings.csv"), &timings, &["cell", "algo", "rep", "seconds"])?;

    let hashes: serde_json::Map<String, serde_json::Value> = plan
        .algorithms
        .iter()
        .map(|&a| (a.as_str().to_owned(), plan.config_hash(a).into()))
        .collect();
    let meta = serde_json::json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "plan": plan,
        "config_hashes": hashes,
        "cells": cells.len(),
        "rows": rows.len(),
        "failed_cells": errors.len(),
    });
    let path = dir.join("meta.json");
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::file(&path, e))?);
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;

    Ok(PlanOutcome {
        output: dir.clone(),
        rows,
        summary,
        errors,
    })
}

const RESULT_HEADER: &[&str] = &[
    "cell",
    "algo",
    "s",
    "seed_size",
    "rep",
    "instance_rng",
    "config_hash",
    "iteration",
    "kind",
    "threshold",
    "final",
    "weight",
    "matched",
    "correct",
    "truth",
    "precision",
    "recall",
    "f1",
    "weight_per_pair",
    "reachable_recall",
    "spreads",
    "mark_increments",
];

const SUMMARY_HEADER: &[&str] = &[
    "algo",
    "s",
    "seed_size",
    "runs",
    "f1_mean",
    "f1_stderr",
    "precision_mean",
    "precision_stderr",
    "recall_mean",
    "recall_stderr",
    "weight_mean",
    "iterations_mean",
];

const ERROR_HEADER: &[&str] = &["cell", "s", "seed_size", "rep", "algo", "error"];

/// Serializes `rows`; with no rows the header is still written.
fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(BufWriter::new(file));
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard error of the final snapshot per `(algo, s, seed size)`,
/// in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, u64, usize)> = Vec::new();
    for r in rows {
        let k = (r.algo.as_str(), r.s.to_bits(), r.seed_size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .filter_map(|(algo, s_bits, seed_size)| {
            let s = f64::from_bits(s_bits);
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.algo == algo && r.s == s && r.seed_size == seed_size)
                .collect();
            summary_row(algo, s, seed_size, &group)
        })
        .collect()
}

fn summary_row(algo: &str, s: f64, seed_size: usize, group: &[&ResultRow]) -> Option<SummaryRow> {
    let finals: Vec<&&ResultRow> = group.iter().filter(|r| r.is_final).collect();
    if finals.is_empty() {
        return None;
    }
    let stat = |f: fn(&ResultRow) -> f64| {
        let v: Vec<f64> = finals.iter().map(|r| f(r)).collect();
        mean_stderr(&v)
    };
    let (f1_mean, f1_stderr) = stat(|r| r.f1);
    let (precision_mean, precision_stderr) = stat(|r| r.precision);
    let (recall_mean, recall_stderr) = stat(|r| r.recall);
    let (weight_mean, _) = stat(|r| r.weight as f64);
    Some(SummaryRow {
        algo: algo.to_owned(),
        s,
        seed_size,
        runs: finals.len(),
        f1_mean,
        f1_stderr,
        precision_mean,
        precision_stderr,
        recall_mean,
        recall_stderr,
        weight_mean,
        iterations_mean: group.len() as f64 / finals.len() as f64,
    })
}

/// Files written by [`emit_plot_data`].
pub const PLOT_SEED_SIZE: &str = "plot_seed_size.csv";
pub const PLOT_ITERATION: &str = "plot_iteration.csv";
pub const PLOT_PRECISION_DELTA: &str = "plot_precision_delta.csv";

#[derive(Serialize)]
struct SeedSizeRow<'a> {
    algo: &'a str,
    s: f64,
    seed_size: usize,
    metric: &'a str,
    mean: f64,
    stderr: f64,
    runs: usize,
}

#[derive(Serialize)]
struct IterationRow<'a> {
    algo: &'a str,
    s: f64,
    seed_size: usize,
    rep: usize,
    iteration: usize,
    kind: &'a str,
    weight: usize,
    precision: f64,
    recall: f64,
    f1: f64,
}

#[derive(Serialize)]
struct PrecisionDeltaRow<'a> {
    algo: &'a str,
    s: f64,
    seed_size: usize,
    rep: usize,
    from: usize,
    to: usize,
    weight_delta: i64,
    weight_per_pair_delta: f64,
    matched_delta: i64,
    precision_delta: f64,
    f1_delta: f64,
}

/// Reads `results.csv` from `dir` and writes three long-format CSVs:
/// final metrics against seed size, metrics per iteration, and precision
/// change against the weight diagnostics between consecutive iterations.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = read_results(&dir.join("results.csv"))?;

    let mut seed_rows = Vec::new();
    let summary = summarize(&rows);
    for sum in &summary {
        for (metric, mean, stderr) in [
            ("precision", sum.precision_mean, sum.precision_stderr),
            ("recall", sum.recall_mean, sum.recall_stderr),
            ("f1", sum.f1_mean, sum.f1_stderr),
        ] {
            seed_rows.push(SeedSizeRow {
                algo: &sum.algo,
                s: sum.s,
                seed_size: sum.seed_size,
                metric,
                mean,
                stderr,
                runs: sum.runs,
            });
        }
    }

    let iter_rows: Vec<IterationRow> = rows
        .iter()
        .map(|r| IterationRow {
            algo: &r.algo,
            s: r.s,
            seed_size: r.seed_size,
            rep: r.rep,
            iteration: r.iteration,
            kind: &r.kind,
            weight: r.weight,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        })
        .collect();

    let mut delta_rows = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.cell != b.cell || a.algo != b.algo || b.iteration != a.iteration + 1 {
            continue;
        }
        delta_rows.push(PrecisionDeltaRow {
            algo: &b.algo,
            s: b.s,
            seed_size: b.seed_size,
            rep: b.rep,
            from: a.iteration,
            to: b.iteration,
            weight_delta: b.weight as i64 - a.weight as i64,
            weight_per_pair_delta: b.weight_per_pair - a.weight_per_pair,
            matched_delta: b.matched as i64 - a.matched as i64,
            precision_delta: b.precision - a.precision,
            f1_delta: b.f1 - a.f1,
        });
    }

    let paths = [PLOT_SEED_SIZE, PLOT_ITERATION, PLOT_PRECISION_DELTA].map(|n| dir.join(n));
    write_csv(&paths[0], &seed_rows, &["algo", "s", "seed_size", "metric", "mean", "stderr", "runs"])?;
    write_csv(
        &paths[1],
        &iter_rows,
        &["algo", "s", "seed_size", "rep", "iteration", "kind", "weight", "precision", "recall", "f1"],
    )?;
    write_csv(
        &paths[2],
        &delta_rows,
        &[
            "algo",
            "s",
            "seed_size",
            "rep",
            "from",
            "to",
            "weight_delta",
            "weight_per_pair_delta",
            "matched_delta",
            "precision_delta",
            "f1_delta",
        ],
    )?;
    Ok(paths.to_vec())
}

/// Parses `results.csv`. A row that does not fit the schema is reported
/// with its line and, when readable, its cell.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    if let Some(missing) = RESULT_HEADER.iter().find(|h| !headers.iter().any(|x| x == **h)) {
        return Err(Error::Parse {
            source_name: path.display().to_string(),
            line: 1,
            reason: format!("missing column {missing:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: ResultRow = record.deserialize(Some(&headers)).map_err(|e| {
            let cell = record.get(0).unwrap_or("?");
            Error::Parse {
                source_name: path.display().to_string(),
                line,
                reason: format!("cell {cell}: {e}"),
            }
        })?;
        rows.push(row);
    }
    Ok(rows)
}
