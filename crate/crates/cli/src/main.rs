use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use graphmatch::experiment::{emit_plot_data, read_results, run_plan, summarize, Algorithm, ExperimentPlan};
use graphmatch::graph::read_edge_list;
use graphmatch::metrics::score_matching;
use graphmatch::oracle::{theorem1_experiment, TheoremConfig};
use graphmatch::synth::{self, Instance, SamplingConfig};
use graphmatch::{
    expand_once, expand_when_stuck, irma, parallel_ews, parallel_irma, IrmaConfig, Matching,
    ParallelConfig, Trace,
};

#[derive(Parser)]
#[command(name = "graphmatch", version, about = "Seeded graph matching by percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a correlated graph pair with ground truth and a seed.
    Gen(GenArgs),
    /// Run one algorithm on an instance directory.
    Run(RunArgs),
    /// Run an experiment plan (JSON or TOML).
    Sweep(SweepArgs),
    /// Turn a results directory into plot-ready CSVs.
    Report(ReportArgs),
    /// Run the ExpandOnce score-gap experiment and print its summary.
    Theorem(TheoremArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Er,
    Ba,
    Edges,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Vertex count of a generated source graph.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Mean degree of an ER source.
    #[arg(long, default_value_t = 10.0)]
    mean_degree: f64,
    /// Edges per new vertex of a BA source.
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Edge list used when `--source edges`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Edge retention probability.
    #[arg(long, default_value_t = 0.7)]
    s: f64,
    #[arg(long, default_value_t = 100)]
    seed_size: usize,
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Keep the second graph's vertex ids equal to the source ids.
    #[arg(long)]
    no_relabel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Ews,
    Irma,
    ExpandOnce,
}

#[derive(Args)]
struct RunArgs {
    /// Directory written by `gen`.
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Irma)]
    algo: Algo,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, overrides_with = "no_explore")]
    explore: bool,
    #[arg(long)]
    no_explore: bool,
    #[arg(long)]
    post_explore_iters: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Artificial seed cap as a multiple of |V1|.
    #[arg(long)]
    cap_factor: Option<f64>,
    /// Disable the artificial seed cap.
    #[arg(long, conflicts_with = "cap_factor")]
    no_cap: bool,
    /// Use the epoch-parallel variant.
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Random stream of ExpandOnce.
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Write the step trace as TSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final matching as tab-separated labels.
    #[arg(long)]
    matching: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    plan: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated subset of ews, irma, parallel-ews, parallel-irma.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Also write the plot CSVs.
    #[arg(long)]
    report: bool,
}

#[derive(Args)]
struct ReportArgs {
    dir: PathBuf,
}

#[derive(Args)]
struct TheoremArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0.02)]
    theta: f64,
    #[arg(long, default_value_t = 0.7)]
    s: f64,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long)]
    seed_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    rng: u64,
    /// Include every run's trace in the output.
    #[arg(long)]
    keep_traces: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a).map(|_| 0),
        Command::Run(a) => run(a).map(|_| 0),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(&a.dir).map(|_| 0),
        Command::Theorem(a) => theorem(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let (source, name) = match a.source {
        SourceKind::Er => {
            let p = a.mean_degree / (a.n as f64 - 1.0);
            (synth::erdos_renyi(a.n, p, synth::derive_seed(a.rng, 0))?, format!("er(n={},deg={})", a.n, a.mean_degree))
        }
        SourceKind::Ba => (
            synth::barabasi_albert(a.n, a.m, synth::derive_seed(a.rng, 0))?,
            format!("ba(n={},m={})", a.n, a.m),
        ),
        SourceKind::Edges => {
            let path = a.input.context("--source edges needs --input")?;
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            (read_edge_list(io::BufReader::new(file), &path.display().to_string())?, path.display().to_string())
        }
    };
    let cfg = SamplingConfig {
        s: a.s,
        rng_seed: synth::derive_seed(a.rng, 1),
        relabel: !a.no_relabel,
    };
    let mut inst = synth::sample_pair(&source, &name, cfg)?;
    inst.reseed(a.seed_size, synth::derive_seed(a.rng, 2))?;
    inst.save(&a.out)?;
    println!(
        "{}",
        json!({
            "out": a.out,
            "g1_vertices": inst.g1.vertex_count(),
            "g1_edges": inst.g1.edge_count(),
            "g2_vertices": inst.g2.vertex_count(),
            "g2_edges": inst.g2.edge_count(),
            "truth": inst.truth.len(),
            "seed": inst.seed.len(),
        })
    );
    Ok(())
}

fn irma_config(a: &RunArgs) -> IrmaConfig {
    let mut cfg = IrmaConfig::default();
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if a.no_explore {
        cfg.explore = false;
    }
    if let Some(k) = a.post_explore_iters {
        cfg.post_explore_iters = k;
    }
    if let Some(k) = a.max_iters {
        cfg.max_iters = k;
    }
    if a.no_cap {
        cfg.ews.artificial_cap_factor = None;
    } else if let Some(f) = a.cap_factor {
        cfg.ews.artificial_cap_factor = Some(f);
    }
    cfg.ews.trace = a.trace.is_some();
    cfg
}

fn run(a: RunArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let cfg = irma_config(&a);
    let par = ParallelConfig { workers: a.workers };
    let out = io::stdout();
    let mut out = out.lock();
    let (matching, trace): (Matching, Option<Trace>) = match a.algo {
        Algo::Ews | Algo::ExpandOnce => {
            let r = match a.algo {
                Algo::ExpandOnce => expand_once(&inst.g1, &inst.g2, &inst.seed, a.rng, &cfg.ews)?,
                _ if a.parallel => parallel_ews(&inst.g1, &inst.g2, &inst.seed, &cfg.ews, &par)?,
                _ => expand_when_stuck(&inst.g1, &inst.g2, &inst.seed, &cfg.ews)?,
            };
            let m = score_matching(&r.matching, &inst.truth, &inst.g1, &inst.g2);
            writeln!(out, "{}", json!({"iteration": 0, "kind": "initial", "final": true, "metrics": m, "stats": r.stats}))?;
            (r.matching, r.trace)
        }
        Algo::Irma => {
            let run = if a.parallel {
                parallel_irma(&inst.g1, &inst.g2, &inst.seed, &cfg, &par, Some(&inst.truth))?
            } else {
                irma(&inst.g1, &inst.g2, &inst.seed, &cfg, Some(&inst.truth))?
            };
            for s in &run.snapshots {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "iteration": s.index,
                        "kind": s.kind.as_str(),
                        "threshold": s.threshold,
                        "final": s.index == run.final_index,
                        "metrics": s.metrics,
                        "stats": s.stats,
                    })
                )?;
            }
            let final_index = run.final_index;
            let trace = run.trace;
            let matching = run.snapshots.into_iter().nth(final_index).expect("final snapshot").matching;
            (matching, trace)
        }
    };
    if let (Some(path), Some(trace)) = (&a.trace, &trace) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        trace.write_tsv(&mut w, Some(&inst.truth))?;
        w.flush()?;
    }
    if let Some(path) = &a.matching {
        write_matching(path, &inst, &matching)?;
    }
    Ok(())
}

fn write_matching(path: &Path, inst: &Instance, matching: &Matching) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for p in matching.sorted_pairs() {
        writeln!(w, "{}\t{}", inst.g1.label(p.u), inst.g2.label(p.v))?;
    }
    w.flush()?;
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<u8> {
    let mut plan = ExperimentPlan::from_file(&a.plan)?;
    if let Some(out) = a.out {
        plan.output = out;
    }
    if let Some(r) = a.repetitions {
        plan.repetitions = r;
    }
    if let Some(r) = a.rng_seed {
        plan.rng_seed = r;
    }
    if let Some(w) = a.workers {
        plan.workers = w;
    }
    if let Some(names) = a.algorithms {
        plan.algorithms = names
            .iter()
            .map(|n| Algorithm::parse(n.trim()).with_context(|| format!("unknown algorithm {n:?}")))
            .collect::<Result<_>>()?;
    }
    let outcome = run_plan(&plan)?;
    for e in &outcome.errors {
        eprintln!("cell {} ({}, s={}, seed={}, rep={}): {}", e.cell, e.algo, e.s, e.seed_size, e.rep, e.error);
    }
    for s in &outcome.summary {
        println!("{}", serde_json::to_string(s)?);
    }
    if a.report {
        report(&outcome.output)?;
    }
    Ok(outcome.exit_code() as u8)
}

fn report(dir: &Path) -> Result<()> {
    let paths = emit_plot_data(dir)?;
    let rows = read_results(&dir.join("results.csv"))?;
    if rows.is_empty() {
        bail!("{} holds no results", dir.display());
    }
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    for s in summarize(&rows) {
        println!(
            "{:<14} s={:<5} seed={:<6} runs={:<3} f1={:.4}±{:.4} precision={:.4} recall={:.4}",
            s.algo, s.s, s.seed_size, s.runs, s.f1_mean, s.f1_stderr, s.precision_mean, s.recall_mean
        );
    }
    Ok(())
}

fn theorem(a: TheoremArgs) -> Result<()> {
    let mut cfg = TheoremConfig {
        n: a.n,
        theta: a.theta,
        s: a.s,
        runs: a.runs,
        rng_seed: a.rng,
        keep_traces: a.keep_traces,
        ..TheoremConfig::default()
    };
    if let Some(k) = a.seed_size {
        cfg.seed_size = k;
    }
    let summary = theorem1_experiment(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
