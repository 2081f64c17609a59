//! Compact undirected simple graphs with dense vertex ids.
//!
//! Every algorithm in the crate keys on dense `u32` ids so that a candidate
//! pair fits in a single `u64`. The original vertex labels are kept alongside
//! for edge-list I/O.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex index in `[0, vertex_count)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// What normalization did to the raw input while building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub input_edges: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Immutable undirected simple graph.
///
/// Adjacency lists are sorted and duplicate free; `v ∈ N(u)` iff `u ∈ N(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    labels: Vec<String>,
    edge_count: usize,
    stats: LoadStats,
}

impl Graph {
    /// Builds a graph on vertices `0..vertex_count` from index pairs. Vertices
    /// without edges are kept. Labels are the decimal ids.
    pub fn from_edges(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let labels = (0..vertex_count).map(|i| i.to_string()).collect();
        Self::from_indexed(labels, edges)
    }

    /// Builds a graph from index pairs with explicit labels, one per vertex.
    pub fn from_indexed(labels: Vec<String>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = labels.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} vertices do not fit u32 ids")));
        }
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut stats = LoadStats {
            input_edges: edges.len(),
            ..LoadStats::default()
        };
        for &(a, b) in edges {
            for id in [a, b] {
                if id as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        id: id as usize,
                        count: n,
                    });
                }
            }
            if a == b {
                stats.self_loops += 1;
                continue;
            }
            adjacency[a as usize].push(VertexId(b));
            adjacency[b as usize].push(VertexId(a));
        }
        let mut directed = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            directed += list.len();
        }
        let edge_count = directed / 2;
        stats.duplicates = edges.len() - stats.self_loops - edge_count;
        Ok(Graph {
            adjacency,
            labels,
            edge_count,
            stats,
        })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> Result<&[VertexId]> {
        self.adjacency
            .get(v.index())
            .map(Vec::as_slice)
            .ok_or(Error::VertexOutOfRange {
                id: v.index(),
                count: self.vertex_count(),
            })
    }

    /// Unchecked neighbor access for hot loops; panics on a bad id.
    #[inline]
    pub fn adj(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency
            .get(a.index())
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.adjacency.len() as u32).map(VertexId)
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            let a = VertexId(a as u32);
            list.iter().filter(move |&&b| a < b).map(move |&b| (a, b))
        })
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn load_stats(&self) -> LoadStats {
        self.stats
    }

    /// Map from label to dense id.
    pub fn label_index(&self) -> HashMap<&str, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), VertexId(i as u32)))
            .collect()
    }
}

/// Builds a graph from labeled edges. Self-loops are dropped, duplicate
/// edges collapsed and labels re-indexed densely in order of first
/// appearance.
pub fn build_graph<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Graph> {
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut labels = Vec::new();
    let mut intern = |label: &str| -> u32 {
        if let Some(&id) = ids.get(label) {
            return id;
        }
        let id = labels.len() as u32;
        labels.push(label.to_owned());
        ids.insert(label.to_owned(), id);
        id
    };
    let indexed: Vec<(u32, u32)> = edges
        .iter()
        .map(|(a, b)| (intern(a.as_ref()), intern(b.as_ref())))
        .collect();
    Graph::from_indexed(labels, &indexed)
}

/// Reads a whitespace separated edge list. Lines starting with `#` or `%`
/// and blank lines are skipped; tokens past the second are ignored so
/// weighted dumps still load.
pub fn read_edge_list<R: BufRead>(reader: R, source_name: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (tokens.next(), tokens.next()) {
            (Some(a), Some(b)) => edges.push((a.to_owned(), b.to_owned())),
            _ => {
                return Err(Error::Parse {
                    source_name: source_name.to_owned(),
                    line: lineno + 1,
                    reason: "expected two vertex tokens".into(),
                })
            }
        }
    }
    build_graph(&edges)
}

/// Writes one `label label` line per undirected edge.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    for (a, b) in graph.edges() {
        writeln!(out, "{} {}", graph.label(a), graph.label(b))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: &Graph) -> Vec<usize> {
        g.vertices().map(|v| g.degree(v)).collect()
    }

    #[test]
    fn dedup_and_self_loop_drop() {
        let g = build_graph(&[("a", "b"), ("b", "a"), ("b", "b")]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let stats = g.load_stats();
        assert_eq!(stats.self_loops, 1);
        assert_eq!(stats.duplicates, 1);
    }

    #[test]
    fn triangle_degrees() {
        let g = build_graph(&[("0", "1"), ("1", "2"), ("0", "2")]).unwrap();
        assert_eq!(degrees(&g), vec![2, 2, 2]);
        assert_eq!(g.neighbors(VertexId(0)).unwrap(), &[VertexId(1), VertexId(2)]);
    }

    #[test]
    fn path_degrees() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(degrees(&g), vec![1, 2, 2, 2, 1]);
    }

    #[test]
    fn empty_edge_list_is_error() {
        let edges: [(&str, &str); 0] = [];
        assert!(matches!(build_graph(&edges), Err(Error::EmptyGraph)));
    }

    #[test]
    fn isolated_and_star() {
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        assert_eq!(g.neighbors(VertexId(6)).unwrap(), &[] as &[VertexId]);
        assert_eq!(g.neighbors(VertexId(0)).unwrap().len(), 5);
        assert!(matches!(
            g.neighbors(VertexId(7)),
            Err(Error::VertexOutOfRange { id: 7, count: 7 })
        ));
    }

    #[test]
    fn comments_are_skipped() {
        let text = "% header\n# another\n\n1 2\n2 3 0.5\n";
        let g = read_edge_list(text.as_bytes(), "inline").unwrap();
        assert_eq!(g.edge_count(), 2);
        let bad = read_edge_list("1\n".as_bytes(), "inline");
        assert!(matches!(bad, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = build_graph(&[("x", "y"), ("y", "z"), ("z", "x"), ("z", "w")]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice(), "buf").unwrap();
        assert_eq!(back.edge_count(), g.edge_count());
        let mut a: Vec<_> = g.labels().to_vec();
        let mut b: Vec<_> = back.labels().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        let idx = back.label_index();
        for (u, v) in g.edges() {
            assert!(back.has_edge(idx[g.label(u)], idx[g.label(v)]));
        }
    }
}
