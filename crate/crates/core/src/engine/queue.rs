use std::collections::BinaryHeap;

use super::marks::MarkTable;
use super::matching::Matching;
use super::pair::{Pair, ScoreKey};
use crate::graph::Graph;

/// Max-heap of candidate scores with lazy deletion.
///
/// Marks only grow within an iteration, so an entry whose recorded mark
/// count differs from the live count has been superseded by a later push.
/// Such entries, and entries whose pair can no longer be admitted, are
/// discarded when they reach the top.
#[derive(Clone, Debug, Default)]
pub struct CandidateQueue {
    heap: BinaryHeap<ScoreKey>,
    stale_pops: u64,
}

impl CandidateQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys(keys: Vec<ScoreKey>) -> Self {
        CandidateQueue {
            heap: BinaryHeap::from(keys),
            stale_pops: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, key: ScoreKey) {
        self.heap.push(key);
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn stale_pops(&self) -> u64 {
        self.stale_pops
    }

    /// Pops the best entry that is still admissible and current.
    /// `live_marks` returns the authoritative count for a pair.
    pub fn pop_valid(
        &mut self,
        matching: &Matching,
        mut live_marks: impl FnMut(Pair) -> u32,
    ) -> Option<ScoreKey> {
        while let Some(top) = self.heap.pop() {
            if matching.is_free(top.pair) && live_marks(top.pair) == top.marks {
                return Some(top);
            }
            self.stale_pops += 1;
        }
        None
    }
}

/// Exhaustive scan for the admissible pair with the best [`ScoreKey`] among
/// pairs holding at least `threshold` marks.
pub fn best_candidate(
    g1: &Graph,
    g2: &Graph,
    table: &MarkTable,
    matching: &Matching,
    threshold: u32,
) -> Option<Pair> {
    table
        .iter()
        .filter(|&(p, c)| c >= threshold && matching.is_free(p))
        .map(|(p, c)| ScoreKey::new(c, p, g1, g2))
        .max()
        .map(|k| k.pair)
}

/// Number of edges of `g1` whose endpoints are both matched onto an edge
/// of `g2`.
pub fn weight(g1: &Graph, g2: &Graph, matching: &Matching) -> usize {
    g1.edges()
        .filter(|&(a, b)| match (matching.image(a), matching.image(b)) {
            (Some(x), Some(y)) => g2.has_edge(x, y),
            _ => false,
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clique(n: u32) -> Graph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Graph::from_edges(n as usize, &edges).unwrap()
    }

    #[test]
    fn equal_marks_break_on_key() {
        let g = clique(3);
        let table: MarkTable = [(Pair::new(0, 0), 3), (Pair::new(0, 1), 3)].into_iter().collect();
        let m = Matching::new(3, 3);
        assert_eq!(best_candidate(&g, &g, &table, &m, 2), Some(Pair::new(0, 0)));
    }

    #[test]
    fn smaller_degree_gap_preferred() {
        // Vertex 0 of g1 has degree 5; g2 vertex 1 has degree 1, vertex 2 degree 4.
        let g1 = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let g2 = Graph::from_edges(
            7,
            &[(1, 0), (2, 3), (2, 4), (2, 5), (2, 6)],
        )
        .unwrap();
        let p = Pair::new(0, 1);
        let q = Pair::new(0, 2);
        assert_eq!(p.degree_gap(&g1, &g2), 4);
        assert_eq!(q.degree_gap(&g1, &g2), 1);
        let table: MarkTable = [(p, 5), (q, 5)].into_iter().collect();
        let m = Matching::new(6, 7);
        assert_eq!(best_candidate(&g1, &g2, &table, &m, 2), Some(q));
    }

    #[test]
    fn all_conflicting_gives_none() {
        let g = clique(3);
        let table: MarkTable = [(Pair::new(0, 1), 4), (Pair::new(1, 0), 4)].into_iter().collect();
        let mut m = Matching::new(3, 3);
        m.insert(Pair::new(0, 0)).unwrap();
        assert_eq!(best_candidate(&g, &g, &table, &m, 2), None);
        assert_eq!(best_candidate(&g, &g, &MarkTable::new(), &Matching::new(3, 3), 1), None);
    }

    #[test]
    fn below_threshold_ignored() {
        let g = clique(3);
        let table: MarkTable = [(Pair::new(1, 1), 1)].into_iter().collect();
        let m = Matching::new(3, 3);
        assert_eq!(best_candidate(&g, &g, &table, &m, 2), None);
        assert_eq!(best_candidate(&g, &g, &table, &m, 1), Some(Pair::new(1, 1)));
    }

    #[test]
    fn weight_basics() {
        let g = clique(4);
        let mut m = Matching::new(4, 4);
        assert_eq!(weight(&g, &g, &m), 0);
        for i in 0..4 {
            m.insert(Pair::new(i, i)).unwrap();
        }
        assert_eq!(weight(&g, &g, &m), 6);
    }

    #[test]
    fn weight_on_hand_built_mapping() {
        // g1: path 0-1-2-3-4, g2: cycle 0-1-2-3-4-0.
        let g1 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let g2 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let mut m = Matching::new(5, 5);
        // 0->1, 1->0, 2->4, 3->2, 4->3
        for (u, v) in [(0, 1), (1, 0), (2, 4), (3, 2), (4, 3)] {
            m.insert(Pair::new(u, v)).unwrap();
        }
        // Brute force: (0,1)->(1,0) yes, (1,2)->(0,4) yes, (2,3)->(4,2) no, (3,4)->(2,3) yes.
        assert_eq!(weight(&g1, &g2, &m), 3);
    }

    proptest! {
        // Popping the lazy queue gives the same pair as a full scan.
        #[test]
        fn queue_agrees_with_scan(
            ops in proptest::collection::vec((0u32..8, 0u32..8, any::<bool>()), 1..120),
        ) {
            let g1 = Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (0, 3), (4, 5), (5, 6), (6, 0)]).unwrap();
            let g2 = Graph::from_edges(8, &[(0, 2), (2, 4), (4, 6), (1, 3), (3, 5), (5, 7), (7, 0), (1, 6)]).unwrap();
            let mut table = MarkTable::new();
            let mut queue = CandidateQueue::new();
            let mut m = Matching::new(8, 8);
            for (u, v, admit) in ops {
                let p = Pair::new(u, v);
                let c = table.increment(p);
                if c >= 2 && m.is_free(p) {
                    queue.push(ScoreKey::new(c, p, &g1, &g2));
                }
                if admit {
                    let expected = best_candidate(&g1, &g2, &table, &m, 2);
                    let got = queue.pop_valid(&m, |q| table.get(q)).map(|k| k.pair);
                    prop_assert_eq!(got, expected);
                    if let Some(p) = got {
                        m.insert(p).unwrap();
                    }
                }
            }
        }
    }
}
