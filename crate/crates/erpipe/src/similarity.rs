use erpipe_core::embedding::{similarity_row, EmbeddingVector, NeighborLists};
use rayon::prelude::*;

/// Rows computed per parallel batch; bounds memory to `BLOCK * |right|`.
const BLOCK: usize = 256;

/// Row and column top-`k` of the clamped cosine matrix without holding it.
/// Rows are computed in parallel and fed in index order, so the result does
/// not depend on the worker count.
pub fn neighbor_lists(left: &[EmbeddingVector], right: &[EmbeddingVector], k: usize) -> NeighborLists {
    let mut lists = NeighborLists::new(left.len(), right.len(), k);
    for (b, chunk) in left.chunks(BLOCK).enumerate() {
        let rows: Vec<Vec<f64>> = chunk.par_iter().map(|l| similarity_row(l, right)).collect();
        for (i, row) in rows.iter().enumerate() {
            lists.push_row(b * BLOCK + i, row);
        }
    }
    lists
}
