use serde::{Deserialize, Serialize};

use super::pair::Pair;
use crate::graph::VertexId;

/// Conflict-free partial bijection between the two vertex sets.
///
/// `forward` and `backward` are mutual inverses; `log` records insertions in
/// order and replays to the same maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    forward: Vec<Option<VertexId>>,
    backward: Vec<Option<VertexId>>,
    log: Vec<Pair>,
}

/// Why an insertion was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertError {
    AlreadyMatched,
    Conflict,
    OutOfRange,
}

impl Matching {
    pub fn new(left_count: usize, right_count: usize) -> Self {
        Matching {
            forward: vec![None; left_count],
            backward: vec![None; right_count],
            log: Vec::new(),
        }
    }

    pub fn left_count(&self) -> usize {
        self.forward.len()
    }

    pub fn right_count(&self) -> usize {
        self.backward.len()
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    #[inline]
    pub fn image(&self, u: VertexId) -> Option<VertexId> {
        self.forward.get(u.index()).copied().flatten()
    }

    #[inline]
    pub fn preimage(&self, v: VertexId) -> Option<VertexId> {
        self.backward.get(v.index()).copied().flatten()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.image(pair.u) == Some(pair.v)
    }

    /// Neither endpoint is matched yet, so the pair can be admitted.
    #[inline]
    pub fn is_free(&self, pair: Pair) -> bool {
        self.forward[pair.u.index()].is_none() && self.backward[pair.v.index()].is_none()
    }

    /// The pair shares exactly one endpoint with a matched pair.
    pub fn conflicts(&self, pair: Pair) -> bool {
        let fwd = self.image(pair.u);
        let bwd = self.preimage(pair.v);
        matches!(fwd, Some(v) if v != pair.v) || matches!(bwd, Some(u) if u != pair.u)
    }

    pub fn insert(&mut self, pair: Pair) -> Result<(), InsertError> {
        if pair.u.index() >= self.forward.len() || pair.v.index() >= self.backward.len() {
            return Err(InsertError::OutOfRange);
        }
        if self.contains(pair) {
            return Err(InsertError::AlreadyMatched);
        }
        if !self.is_free(pair) {
            return Err(InsertError::Conflict);
        }
        self.forward[pair.u.index()] = Some(pair.v);
        self.backward[pair.v.index()] = Some(pair.u);
        self.log.push(pair);
        Ok(())
    }

    /// Pairs in insertion order.
    pub fn pairs(&self) -> &[Pair] {
        &self.log
    }

    pub fn sorted_pairs(&self) -> Vec<Pair> {
        let mut pairs = self.log.clone();
        pairs.sort_unstable();
        pairs
    }

    /// Rebuilds the maps from the log and checks they agree with the stored
    /// ones.
    pub fn is_consistent(&self) -> bool {
        let mut replay = Matching::new(self.forward.len(), self.backward.len());
        for &p in &self.log {
            if replay.insert(p).is_err() {
                return false;
            }
        }
        replay.forward == self.forward && replay.backward == self.backward
    }
}
