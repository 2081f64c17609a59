use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};

/// Candidate pair `[u, v]` with `u` in the first graph and `v` in the second.
///
/// The derived order is `(u, v)` lexicographic, which is the same as the
/// order of [`Pair::key`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub u: VertexId,
    pub v: VertexId,
}

impl Pair {
    #[inline]
    pub fn new(u: u32, v: u32) -> Self {
        Pair {
            u: VertexId(u),
            v: VertexId(v),
        }
    }

    /// 64-bit composite key, `u` in the high half.
    #[inline]
    pub fn key(self) -> u64 {
        (u64::from(self.u.0) << 32) | u64::from(self.v.0)
    }

    #[inline]
    pub fn from_key(key: u64) -> Self {
        Pair::new((key >> 32) as u32, key as u32)
    }

    #[inline]
    pub fn degree_gap(self, g1: &Graph, g2: &Graph) -> u32 {
        g1.degree(self.u).abs_diff(g2.degree(self.v)) as u32
    }

    /// Two pairs conflict when they share exactly one endpoint.
    pub fn conflicts_with(self, other: Pair) -> bool {
        (self.u == other.u) != (self.v == other.v)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.u, self.v)
    }
}

/// Priority of a candidate pair.
///
/// Greater is better: more marks first, then the smaller degree gap, then
/// the smaller pair key. This realizes `marks - ε·gap` for infinitesimal `ε`
/// without a floating point `ε`, and the last component makes the order
/// total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScoreKey {
    pub marks: u32,
    pub degree_gap: u32,
    pub pair: Pair,
}

impl ScoreKey {
    #[inline]
    pub fn new(marks: u32, pair: Pair, g1: &Graph, g2: &Graph) -> Self {
        ScoreKey {
            marks,
            degree_gap: pair.degree_gap(g1, g2),
            pair,
        }
    }
}

impl Ord for ScoreKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.marks
            .cmp(&other.marks)
            .then_with(|| other.degree_gap.cmp(&self.degree_gap))
            .then_with(|| other.pair.key().cmp(&self.pair.key()))
    }
}

impl PartialOrd for ScoreKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
