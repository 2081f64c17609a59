//! Correlated graph pairs with ground truth.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based stream cipher generator whose output for a given 64-bit
//! seed is fixed across platforms. Sub-streams are derived from a base seed
//! with a SplitMix64 finalizer so that every cell of an experiment gets its
//! own reproducible stream.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Pair;
use crate::error::{Error, Result};
use crate::graph::{read_edge_list, write_edge_list, Graph, VertexId};
use crate::metrics::GroundTruth;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes `base` with `stream` into an independent 64-bit seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `G(n, p)`: each of the `n(n-1)/2` edges independently with probability
/// `p`. Uses geometric skipping, so the cost is proportional to the number
/// of edges generated.
pub fn erdos_renyi(n: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("G(n,p) needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0,1]")));
    }
    let mut edges = Vec::new();
    if p >= 1.0 {
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                edges.push((a, b));
            }
        }
    } else if p > 0.0 {
        let mut rng = rng(rng_seed);
        let log_q = (1.0 - p).ln();
        // Batagelj & Brandes: walk the lower triangle (v, w), w < v.
        let mut v: usize = 1;
        let mut w: i64 = -1;
        while v < n {
            let r: f64 = rng.random();
            w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
            while w >= v as i64 && v < n {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((w as u32, v as u32));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Preferential attachment: a clique on the first `m` vertices, then each
/// new vertex attaches to `m` distinct existing vertices chosen with
/// probability proportional to degree. The result has exactly
/// `m·(n−m) + m(m−1)/2` edges.
pub fn barabasi_albert(n: usize, m: usize, rng_seed: u64) -> Result<Graph> {
    if m < 1 || n <= m {
        return Err(Error::InvalidParameter(format!(
            "preferential attachment needs n > m >= 1, got n={n} m={m}"
        )));
    }
    let mut rng = rng(rng_seed);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m * n);
    // Every edge endpoint once, so a uniform draw is degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * n);
    for a in 0..m as u32 {
        for b in a + 1..m as u32 {
            edges.push((a, b));
            endpoints.extend([a, b]);
        }
    }
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for t in m..n {
        targets.clear();
        while targets.len() < m {
            let candidate = if endpoints.is_empty() {
                rng.random_range(0..t as u32)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for &x in &targets {
            edges.push((x, t as u32));
            endpoints.extend([x, t as u32]);
        }
    }
    Graph::from_edges(n, &edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Edge retention probability in each sampled graph.
    pub s: f64,
    pub rng_seed: u64,
    /// Shuffle the second graph's vertex ids.
    pub relabel: bool,
}

impl SamplingConfig {
    pub fn new(s: f64, rng_seed: u64) -> Self {
        SamplingConfig {
            s,
            rng_seed,
            relabel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub source: String,
    pub source_vertices: usize,
    pub source_edges: usize,
    pub s: f64,
    pub relabel: bool,
    pub rng_seed: u64,
    pub seed_size: usize,
    pub seed_rng: Option<u64>,
}

/// Two sampled graphs, their ground truth and a seed drawn from it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub g1: Graph,
    pub g2: Graph,
    pub truth: GroundTruth,
    pub seed: Vec<Pair>,
    pub meta: InstanceMeta,
}

/// Samples two graphs from `source` by independently keeping each edge with
/// probability `s`, then drops vertices left isolated in each graph.
/// Ground truth holds the source vertices that survive in both.
pub fn sample_pair(source: &Graph, source_name: &str, cfg: SamplingConfig) -> Result<Instance> {
    if !(cfg.s > 0.0 && cfg.s <= 1.0) {
        return Err(Error::InvalidParameter(format!("overlap s={} outside (0,1]", cfg.s)));
    }
    if source.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = rng(cfg.rng_seed);
    let mut kept1 = Vec::new();
    let mut kept2 = Vec::new();
    for (a, b) in source.edges() {
        let in1 = rng.random::<f64>() < cfg.s;
        let in2 = rng.random::<f64>() < cfg.s;
        if in1 {
            kept1.push((a, b));
        }
        if in2 {
            kept2.push((a, b));
        }
    }

    let n = source.vertex_count();
    let (g1, map1) = compact(source, &kept1, None)?;
    let order2 = if cfg.relabel {
        let survivors = survivors(n, &kept2);
        let mut perm: Vec<u32> = (0..survivors as u32).collect();
        perm.shuffle(&mut rng);
        Some(perm)
    } else {
        None
    };
    let (g2, map2) = compact(source, &kept2, order2.as_deref())?;

    let truth_pairs: Vec<Pair> = (0..n)
        .filter_map(|w| match (map1[w], map2[w]) {
            (Some(a), Some(b)) => Some(Pair { u: a, v: b }),
            _ => None,
        })
        .collect();
    if truth_pairs.is_empty() {
        return Err(Error::DegenerateOverlap);
    }
    let truth = GroundTruth::new(g1.vertex_count(), g2.vertex_count(), truth_pairs)?;
    Ok(Instance {
        g1,
        g2,
        truth,
        seed: Vec::new(),
        meta: InstanceMeta {
            source: source_name.to_owned(),
            source_vertices: source.vertex_count(),
            source_edges: source.edge_count(),
            s: cfg.s,
            relabel: cfg.relabel,
            rng_seed: cfg.rng_seed,
            seed_size: 0,
            seed_rng: None,
        },
    })
}

fn survivors(n: usize, kept: &[(VertexId, VertexId)]) -> usize {
    let mut alive = vec![false; n];
    for &(a, b) in kept {
        alive[a.index()] = true;
        alive[b.index()] = true;
    }
    alive.iter().filter(|&&x| x).count()
}

/// Builds the graph on non-isolated vertices. Ids follow source order, or
/// `perm[rank]` when a permutation is supplied; permuted graphs are labeled
/// by their new ids.
fn compact(
    source: &Graph,
    kept: &[(VertexId, VertexId)],
    perm: Option<&[u32]>,
) -> Result<(Graph, Vec<Option<VertexId>>)> {
    let n = source.vertex_count();
    let mut alive = vec![false; n];
    for &(a, b) in kept {
        alive[a.index()] = true;
        alive[b.index()] = true;
    }
    let mut map = vec![None; n];
    let mut rank = 0u32;
    for (w, &is_alive) in alive.iter().enumerate() {
        if is_alive {
            let id = perm.map_or(rank, |p| p[rank as usize]);
            map[w] = Some(VertexId(id));
            rank += 1;
        }
    }
    let count = rank as usize;
    let mut labels = vec![String::new(); count];
    for (w, id) in map.iter().enumerate() {
        if let Some(id) = id {
            labels[id.index()] = match perm {
                Some(_) => id.0.to_string(),
                None => source.label(VertexId(w as u32)).to_owned(),
            };
        }
    }
    let edges: Vec<(u32, u32)> = kept
        .iter()
        .map(|&(a, b)| (map[a.index()].unwrap().0, map[b.index()].unwrap().0))
        .collect();
    Ok((Graph::from_indexed(labels, &edges)?, map))
}

/// Uniformly samples `size` ground-truth pairs without replacement,
/// returned in pair order.
pub fn pick_seed(instance: &Instance, size: usize, rng_seed: u64) -> Result<Vec<Pair>> {
    let pairs = instance.truth.pairs();
    if size > pairs.len() {
        return Err(Error::SeedTooLarge {
            requested: size,
            available: pairs.len(),
        });
    }
    let mut rng = rng(rng_seed);
    let mut seed: Vec<Pair> = sample(&mut rng, pairs.len(), size)
        .into_iter()
        .map(|i| pairs[i])
        .collect();
    seed.sort_unstable();
    Ok(seed)
}

impl Instance {
    /// Replaces the seed with `size` pairs drawn by [`pick_seed`].
    pub fn reseed(&mut self, size: usize, rng_seed: u64) -> Result<()> {
        self.seed = pick_seed(self, size, rng_seed)?;
        self.meta.seed_size = size;
        self.meta.seed_rng = Some(rng_seed);
        Ok(())
    }

    /// Writes `g1.edges`, `g2.edges`, `truth.tsv`, `seed.tsv` and
    /// `meta.json` into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        let create = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            File::create(&path)
                .map(BufWriter::new)
                .map_err(|e| Error::file(path, e))
        };
        let mut w = create("g1.edges")?;
        write_edge_list(&self.g1, &mut w)?;
        w.flush()?;
        let mut w = create("g2.edges")?;
        write_edge_list(&self.g2, &mut w)?;
        w.flush()?;
        for (name, pairs) in [("truth.tsv", self.truth.pairs()), ("seed.tsv", &self.seed[..])] {
            let mut w = create(name)?;
            for p in pairs {
                writeln!(w, "{}\t{}", self.g1.label(p.u), self.g2.label(p.v))?;
            }
            w.flush()?;
        }
        let mut w = create("meta.json")?;
        serde_json::to_writer_pretty(&mut w, &self.meta)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a directory written by [`Instance::save`]. Vertex ids are
    /// re-derived from the edge files, so they need not equal the ids of the
    /// instance that was saved.
    pub fn load(dir: &Path) -> Result<Instance> {
        let open = |name: &str| -> Result<BufReader<File>> {
            let path = dir.join(name);
            File::open(&path)
                .map(BufReader::new)
                .map_err(|e| Error::file(path, e))
        };
        let g1 = read_edge_list(open("g1.edges")?, "g1.edges")?;
        let g2 = read_edge_list(open("g2.edges")?, "g2.edges")?;
        let truth_pairs = read_pairs(open("truth.tsv")?, "truth.tsv", &g1, &g2)?;
        let seed = read_pairs(open("seed.tsv")?, "seed.tsv", &g1, &g2)?;
        let meta: InstanceMeta = serde_json::from_reader(open("meta.json")?)?;
        let truth = GroundTruth::new(g1.vertex_count(), g2.vertex_count(), truth_pairs)?;
        Ok(Instance {
            g1,
            g2,
            truth,
            seed,
            meta,
        })
    }
}

fn read_pairs<R: BufRead>(reader: R, name: &str, g1: &Graph, g2: &Graph) -> Result<Vec<Pair>> {
    let left = g1.label_index();
    let right = g2.label_index();
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse {
            source_name: name.to_owned(),
            line: lineno + 1,
            reason,
        };
        let (a, b) = line
            .split_once('\t')
            .ok_or_else(|| err("expected two tab-separated labels".into()))?;
        let u = *left.get(a).ok_or_else(|| err(format!("unknown g1 label {a:?}")))?;
        let v = *right.get(b).ok_or_else(|| err(format!("unknown g2 label {b:?}")))?;
        pairs.push(Pair { u, v });
    }
    Ok(pairs)
}
