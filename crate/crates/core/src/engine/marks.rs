use rustc_hash::{FxHashMap, FxHashSet};

use super::pair::Pair;
use crate::graph::Graph;

/// Per-pair mark counters for one iteration. An absent key means zero.
///
/// Backed by a hash map on the 64-bit pair key: real tables are far
/// sparser than `|V1|·|V2|`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkTable {
    counts: FxHashMap<u64, u32>,
}

impl MarkTable {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, pair: Pair) -> u32 {
        self.counts.get(&pair.key()).copied().unwrap_or(0)
    }

    /// Adds one mark and returns the new count.
    #[inline]
    pub fn increment(&mut self, pair: Pair) -> u32 {
        self.add(pair.key(), 1)
    }

    #[inline]
    pub(crate) fn add(&mut self, key: u64, amount: u32) -> u32 {
        let slot = self.counts.entry(key).or_insert(0);
        *slot += amount;
        *slot
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total_marks(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    /// Entries in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (Pair, u32)> + '_ {
        self.counts.iter().map(|(&k, &c)| (Pair::from_key(k), c))
    }

    /// Entries sorted by pair key.
    pub fn sorted_entries(&self) -> Vec<(Pair, u32)> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_unstable_by_key(|(p, _)| *p);
        entries
    }

    /// Adds every count of `other` into `self`.
    pub fn merge(&mut self, other: &MarkTable) {
        self.counts.reserve(other.counts.len());
        for (&k, &c) in &other.counts {
            self.add(k, c);
        }
    }

}

impl FromIterator<(Pair, u32)> for MarkTable {
    fn from_iter<I: IntoIterator<Item = (Pair, u32)>>(iter: I) -> Self {
        let mut table = MarkTable::new();
        for (p, c) in iter {
            if c > 0 {
                table.add(p.key(), c);
            }
        }
        table
    }
}

/// The set `Z` of pairs that already spread marks in the current iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpreadLog {
    used: FxHashSet<u64>,
}

impl SpreadLog {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn contains(&self, pair: Pair) -> bool {
        self.used.contains(&pair.key())
    }

    /// Records `pair`; false if it was already present.
    #[inline]
    pub fn insert(&mut self, pair: Pair) -> bool {
        self.used.insert(pair.key())
    }

    pub fn len(&self) -> usize {
        self.used.len()
    }

    pub fn is_empty(&self) -> bool {
        self.used.is_empty()
    }

    pub fn sorted(&self) -> Vec<Pair> {
        let mut pairs: Vec<_> = self.used.iter().map(|&k| Pair::from_key(k)).collect();
        pairs.sort_unstable();
        pairs
    }
}

/// Result of a [`spread_marks`] call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadOutcome {
    Spread { increments: u64 },
    AlreadyUsed,
}

/// Adds one mark to every neighboring pair of `pair` and records it in
/// `used`. A pair already in `used` is left alone.
pub fn spread_marks(
    g1: &Graph,
    g2: &Graph,
    pair: Pair,
    table: &mut MarkTable,
    used: &mut SpreadLog,
) -> SpreadOutcome {
    if !used.insert(pair) {
        return SpreadOutcome::AlreadyUsed;
    }
    let increments = spread_with(g1, g2, pair, |key| {
        table.add(key, 1);
    });
    SpreadOutcome::Spread { increments }
}

/// Calls `mark` with the key of each of the `d1(u)·d2(v)` neighboring pairs.
#[inline]
pub(crate) fn spread_with(g1: &Graph, g2: &Graph, pair: Pair, mut mark: impl FnMut(u64)) -> u64 {
    let left = g1.adj(pair.u);
    let right = g2.adj(pair.v);
    for &a in left {
        let high = u64::from(a.0) << 32;
        for &b in right {
            mark(high | u64::from(b.0));
        }
    }
    (left.len() * right.len()) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn isolated_pair_spreads_nothing() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let mut table = MarkTable::new();
        let mut used = SpreadLog::new();
        let out = spread_marks(&g, &g, Pair::new(2, 2), &mut table, &mut used);
        assert_eq!(out, SpreadOutcome::Spread { increments: 0 });
        assert!(table.is_empty());
        assert!(used.contains(Pair::new(2, 2)));
    }

    #[test]
    fn increments_are_degree_product() {
        // u has degree 2 in the path, v degree 3 in the star.
        let g1 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let g2 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut table = MarkTable::new();
        let mut used = SpreadLog::new();
        let out = spread_marks(&g1, &g2, Pair::new(1, 0), &mut table, &mut used);
        assert_eq!(out, SpreadOutcome::Spread { increments: 6 });
        assert_eq!(table.len(), 6);
        assert_eq!(table.total_marks(), 6);
    }

    #[test]
    fn second_spread_is_a_no_op() {
        let g = triangle();
        let mut table = MarkTable::new();
        let mut used = SpreadLog::new();
        spread_marks(&g, &g, Pair::new(0, 0), &mut table, &mut used);
        let before = table.clone();
        let out = spread_marks(&g, &g, Pair::new(0, 0), &mut table, &mut used);
        assert_eq!(out, SpreadOutcome::AlreadyUsed);
        assert_eq!(table, before);
    }

    #[test]
    fn identity_overlap_marks_true_neighbors() {
        let g = triangle();
        let mut table = MarkTable::new();
        let mut used = SpreadLog::new();
        spread_marks(&g, &g, Pair::new(0, 0), &mut table, &mut used);
        assert_eq!(table.get(Pair::new(1, 1)), 1);
        assert_eq!(table.get(Pair::new(2, 2)), 1);
        assert_eq!(table.get(Pair::new(0, 0)), 0);
    }

    #[test]
    fn merge_adds_counts() {
        let mut a: MarkTable = [(Pair::new(0, 0), 2), (Pair::new(1, 1), 1)].into_iter().collect();
        let b: MarkTable = [(Pair::new(1, 1), 3), (Pair::new(2, 0), 1)].into_iter().collect();
        a.merge(&b);
        assert_eq!(
            a.sorted_entries(),
            vec![(Pair::new(0, 0), 2), (Pair::new(1, 1), 4), (Pair::new(2, 0), 1)]
        );
    }
}
