//! Bidirectional top-k blocking over the tuple similarity matrix.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::embedding::{NeighborLists, SimilarityMatrix};

pub const DEFAULT_K: usize = 20;

/// Candidate pairs `(left index, right index)`, sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub pairs: Vec<(usize, usize)>,
    pub k: usize,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }
}

/// Pairs where the right tuple is among the `k` most similar for its row, or
/// the left tuple is among the `k` most similar for its column.
pub fn block_topk(m: &SimilarityMatrix, k: usize) -> CandidateSet {
    block_neighbors(&NeighborLists::from_matrix(m, k), k)
}

/// Same as [`block_topk`] on precomputed neighbor lists (`lists.k() >= k`).
pub fn block_neighbors(lists: &NeighborLists, k: usize) -> CandidateSet {
    assert!(k >= 1, "blocking budget must be positive");
    assert!(lists.k() >= k, "neighbor lists shallower than blocking budget");
    let mut pairs = BTreeSet::new();
    for i in 0..lists.row_count() {
        for n in lists.row(i).iter().take(k) {
            pairs.insert((i, n.index));
        }
    }
    for j in 0..lists.col_count() {
        for n in lists.col(j).iter().take(k) {
            pairs.insert((n.index, j));
        }
    }
    CandidateSet {
        pairs: pairs.into_iter().collect(),
        k,
    }
}
