#![allow(dead_code)]

use graphmatch::synth::{self, derive_seed, SamplingConfig};
use graphmatch::{Graph, Instance, Pair};

pub fn clique(n: u32) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    Graph::from_edges(n as usize, &edges).unwrap()
}

pub fn path(n: u32) -> Graph {
    let edges: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n as usize, &edges).unwrap()
}

pub fn identity(k: u32) -> Vec<Pair> {
    (0..k).map(|i| Pair::new(i, i)).collect()
}

/// Full-overlap instance with identity labels.
pub fn self_instance(g: &Graph, seed_size: usize) -> Instance {
    let cfg = SamplingConfig {
        s: 1.0,
        rng_seed: 0,
        relabel: false,
    };
    let mut inst = synth::sample_pair(g, "fixed", cfg).unwrap();
    inst.reseed(seed_size, 0).unwrap();
    inst
}

pub fn er_instance(n: usize, mean_degree: f64, s: f64, seed_size: usize, rng: u64) -> Instance {
    let source = synth::erdos_renyi(n, mean_degree / (n as f64 - 1.0), derive_seed(rng, 0)).unwrap();
    let mut inst = synth::sample_pair(&source, "er", SamplingConfig::new(s, derive_seed(rng, 1))).unwrap();
    inst.reseed(seed_size, derive_seed(rng, 2)).unwrap();
    inst
}

pub fn ba_instance(n: usize, m: usize, s: f64, seed_size: usize, rng: u64) -> Instance {
    let source = synth::barabasi_albert(n, m, derive_seed(rng, 0)).unwrap();
    let mut inst = synth::sample_pair(&source, "ba", SamplingConfig::new(s, derive_seed(rng, 1))).unwrap();
    inst.reseed(seed_size, derive_seed(rng, 2)).unwrap();
    inst
}

/// Shared edges under `pairs`, counted by scanning every edge of `g1`.
pub fn shared_edges(g1: &Graph, g2: &Graph, pairs: &[Pair]) -> usize {
    let mut image = vec![None; g1.vertex_count()];
    for p in pairs {
        image[p.u.index()] = Some(p.v);
    }
    g1.edges()
        .filter(|&(a, b)| match (image[a.index()], image[b.index()]) {
            (Some(x), Some(y)) => g2.has_edge(x, y),
            _ => false,
        })
        .count()
}
