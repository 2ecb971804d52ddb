mod common;

use common::*;
use erpipe_core::blocking::*;
use erpipe_core::embedding::{Encoder, HashedNgramEncoder, SimilarityMatrix};
use erpipe_core::synthetic::{make_synthetic, SyntheticSpec};
use rand::Rng;

#[test]
fn perfect_matching_at_k1() {
    // row and column maxima both sit on the permutation 0->3, 1->0, ...
    let perm = [3, 0, 4, 1, 5, 2];
    let m: Vec<Vec<f64>> = (0..6)
        .map(|i| (0..6).map(|j| if perm[i] == j { 0.9 } else { 0.1 + 0.01 * (i + j) as f64 }).collect())
        .collect();
    let c = block_topk(&SimilarityMatrix::from_rows(&m), 1);
    let want: Vec<_> = (0..6).map(|i| (i, perm[i])).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    assert_eq!(c.pairs, want);
    assert_eq!(c.pairs, block_oracle(&m, 1));
}

#[test]
fn large_budget_gives_cross_product() {
    let m = random_matrix(&mut rng(31), 3, 5);
    let c = block_topk(&SimilarityMatrix::from_rows(&m), 5);
    assert_eq!(c.len(), 15);
}

#[test]
fn four_by_four_k2() {
    let m = vec![
        vec![0.9, 0.5, 0.5, 0.1],
        vec![0.2, 0.8, 0.3, 0.3],
        vec![0.4, 0.1, 0.7, 0.6],
        vec![0.1, 0.2, 0.6, 0.9],
    ];
    let c = block_topk(&SimilarityMatrix::from_rows(&m), 2);
    assert_eq!(c.pairs, block_oracle(&m, 2));
    // row 0 ties at 0.5: the lower column index wins
    assert!(c.contains((0, 1)) && !c.contains((0, 2)));
}

#[test]
fn random_matrices_match_oracle_and_are_monotone() {
    let mut r = rng(32);
    for _ in 0..200 {
        let (rows, cols) = (r.random_range(1..=15), r.random_range(1..=15));
        let m = random_matrix(&mut r, rows, cols);
        let sm = SimilarityMatrix::from_rows(&m);
        let k = r.random_range(1..=6);
        let a = block_topk(&sm, k);
        let b = block_topk(&sm, k + 1);
        assert_eq!(a.pairs, block_oracle(&m, k));
        assert!(a.pairs.iter().all(|p| b.contains(*p)));
        assert!(a.pairs.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn row_maximum_matches_survive_k1() {
    let syn = make_synthetic(&SyntheticSpec { left_size: 120, right_size: 120, matches: 80, seed: 3, ..Default::default() }).unwrap();
    let enc = Encoder::Hashed(HashedNgramEncoder::with_dimension(256, 0).unwrap());
    let m = SimilarityMatrix::from_embeddings(&enc.embed_dataset(&syn.left).unwrap(), &enc.embed_dataset(&syn.right).unwrap()).unwrap();
    let c = block_topk(&m, 1);
    for &(l, r) in &syn.truth {
        let row = m.row(l);
        let top = row.iter().copied().fold(f64::MIN, f64::max);
        if row[r] == top && row.iter().position(|v| *v == top) == Some(r) {
            assert!(c.contains((l, r)));
        }
    }
}
