//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes a JSON parameter object and returns a JSON string.
//! The plain `*_json` functions hold the logic so they can be tested
//! natively.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use graphmatch::oracle::{theorem1_experiment, TheoremConfig};
use graphmatch::synth::{self, derive_seed, SamplingConfig};
use graphmatch::{
    expand_when_stuck, irma, parallel_irma, score_matching, EwsConfig, Instance, IrmaConfig, MetricsReport,
    ParallelConfig,
};

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct InstanceParams {
    /// `"er"` or `"ba"`.
    pub model: String,
    pub n: usize,
    pub mean_degree: f64,
    pub m: usize,
    pub s: f64,
    pub seed_size: usize,
    pub rng: u64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            model: "ba".into(),
            n: 1000,
            mean_degree: 10.0,
            m: 5,
            s: 0.6,
            seed_size: 50,
            rng: 1,
        }
    }
}

impl InstanceParams {
    fn build(&self, seed_size: usize) -> Result<Instance, String> {
        if self.n > 20_000 {
            return Err("n is limited to 20000 in the browser".into());
        }
        let source = match self.model.as_str() {
            "er" => synth::erdos_renyi(self.n, self.mean_degree / (self.n as f64 - 1.0), derive_seed(self.rng, 0)),
            "ba" => synth::barabasi_albert(self.n, self.m, derive_seed(self.rng, 0)),
            other => return Err(format!("unknown model {other:?}")),
        }
        .map_err(|e| e.to_string())?;
        let cfg = SamplingConfig::new(self.s, derive_seed(self.rng, 1));
        let mut inst = synth::sample_pair(&source, &self.model, cfg).map_err(|e| e.to_string())?;
        inst.reseed(seed_size, derive_seed(self.rng, 2)).map_err(|e| e.to_string())?;
        Ok(inst)
    }
}

#[derive(Serialize)]
struct CurvePoint {
    iteration: usize,
    kind: &'static str,
    weight: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    matched: usize,
}

#[derive(Serialize)]
struct Curve {
    vertices: (usize, usize),
    edges: (usize, usize),
    truth: usize,
    ews: MetricsReport,
    points: Vec<CurvePoint>,
    final_index: usize,
    explore_index: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct CurveParams {
    #[serde(flatten)]
    instance: InstanceParams,
    explore: Option<bool>,
    delta: Option<f64>,
}

/// Per-iteration precision, recall, F1 and weight of one IRMA run.
pub fn irma_curve_json(params: &str) -> Result<String, String> {
    let p: CurveParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let inst = p.instance.build(p.instance.seed_size)?;
    let mut cfg = IrmaConfig::default();
    if let Some(e) = p.explore {
        cfg.explore = e;
    }
    if let Some(d) = p.delta {
        cfg.delta = d;
    }
    let ews = expand_when_stuck(&inst.g1, &inst.g2, &inst.seed, &cfg.ews).map_err(|e| e.to_string())?;
    let run = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, Some(&inst.truth)).map_err(|e| e.to_string())?;
    let points = run
        .snapshots
        .iter()
        .map(|s| {
            let m = s.metrics.as_ref().expect("scored run");
            CurvePoint {
                iteration: s.index,
                kind: s.kind.as_str(),
                weight: s.weight,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                matched: m.matched_count,
            }
        })
        .collect();
    let curve = Curve {
        vertices: (inst.g1.vertex_count(), inst.g2.vertex_count()),
        edges: (inst.g1.edge_count(), inst.g2.edge_count()),
        truth: inst.truth.len(),
        ews: score_matching(&ews.matching, &inst.truth, &inst.g1, &inst.g2),
        points,
        final_index: run.final_index,
        explore_index: run.explore_index,
    };
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct SweepParams {
    #[serde(flatten)]
    instance: InstanceParams,
    seed_sizes: Vec<usize>,
}

#[derive(Serialize)]
struct SweepPoint {
    seed_size: usize,
    ews: MetricsReport,
    irma: MetricsReport,
    parallel_irma: MetricsReport,
}

/// Final metrics of EWS, IRMA and epoch-parallel IRMA for each seed size,
/// all on the same sampled pair.
pub fn seed_sweep_json(params: &str) -> Result<String, String> {
    let p: SweepParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if p.seed_sizes.is_empty() {
        return Err("seed_sizes is empty".into());
    }
    let mut out = Vec::new();
    for &k in &p.seed_sizes {
        let inst = p.instance.build(k)?;
        let (g1, g2, seed, truth) = (&inst.g1, &inst.g2, &inst.seed[..], &inst.truth);
        let cfg = IrmaConfig::default();
        let ews = expand_when_stuck(g1, g2, seed, &EwsConfig::default()).map_err(|e| e.to_string())?;
        let seq = irma(g1, g2, seed, &cfg, Some(truth)).map_err(|e| e.to_string())?;
        let par = parallel_irma(g1, g2, seed, &cfg, &ParallelConfig::default(), Some(truth)).map_err(|e| e.to_string())?;
        let fin = |r: &graphmatch::IrmaRun| r.final_snapshot().metrics.clone().expect("scored run");
        out.push(SweepPoint {
            seed_size: k,
            ews: score_matching(&ews.matching, truth, g1, g2),
            irma: fin(&seq),
            parallel_irma: fin(&par),
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Score gaps of blocked true pairs against the wrong pairs that blocked
/// them, from repeated ExpandOnce runs.
pub fn mark_gap_json(params: &str) -> Result<String, String> {
    let cfg: TheoremConfig = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if cfg.n > 5_000 || cfg.runs > 200 {
        return Err("n <= 5000 and runs <= 200 in the browser".into());
    }
    let summary = theorem1_experiment(&cfg).map_err(|e| e.to_string())?;
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = irmaCurve)]
pub fn irma_curve(params: &str) -> Result<String, JsValue> {
    js(irma_curve_json(params))
}

#[wasm_bindgen(js_name = seedSweep)]
pub fn seed_sweep(params: &str) -> Result<String, JsValue> {
    js(seed_sweep_json(params))
}

#[wasm_bindgen(js_name = markGap)]
pub fn mark_gap(params: &str) -> Result<String, JsValue> {
    js(mark_gap_json(params))
}
