mod common;

use common::*;
use erpipe_core::dataset::{Dataset, Tuple};
use erpipe_core::embedding::*;
use rand::Rng;

fn ev(v: &[f64]) -> EmbeddingVector {
    EmbeddingVector::new(v.to_vec()).unwrap()
}

#[test]
fn encoder_contract() {
    let enc = HashedNgramEncoder::with_dimension(256, 0).unwrap();
    assert_eq!(enc.embed_text("abc"), enc.embed_text("abc"));
    assert!(enc.embed_text("").is_zero());
    assert!((enc.embed_text("aspyr media").norm() - 1.0).abs() <= 1e-9);
    assert!((enc.embed_text("a").norm() - 1.0).abs() <= 1e-9);
    assert_ne!(enc.embed_text("abc"), HashedNgramEncoder::with_dimension(256, 1).unwrap().embed_text("abc"));
    assert!(HashedNgramEncoder::with_dimension(0, 0).is_err());
    assert!(HashedNgramEncoder::new(8, vec![], 0).is_err());
}

#[test]
fn encoder_counts_ngrams() {
    // with one bucket every gram lands in the same place
    let enc = HashedNgramEncoder::new(1, vec![2], 0).unwrap();
    assert_eq!(enc.embed_text("abcd").as_slice(), &[1.0]);
}

#[test]
fn cosine_cases() {
    let v = ev(&[0.3, -2.0, 1.0]);
    assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(cosine_similarity(&ev(&[1.0, 0.0]), &ev(&[0.0, 1.0])).unwrap(), 0.0);
    assert_eq!(cosine_similarity(&ev(&[1.0, 0.0]), &ev(&[-1.0, 0.0])).unwrap(), -1.0);
    assert_eq!(cosine_similarity(&ev(&[0.0, 0.0]), &ev(&[1.0, 0.0])).unwrap(), 0.0);
    assert!(cosine_similarity(&ev(&[1.0]), &ev(&[1.0, 0.0])).is_err());
    assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
}

#[test]
fn cosine_is_exactly_symmetric() {
    let mut r = rng(21);
    for _ in 0..200 {
        let a = ev(&(0..7).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let b = ev(&(0..7).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>());
        assert_eq!(cosine_similarity(&a, &b).unwrap(), cosine_similarity(&b, &a).unwrap());
    }
}

fn dataset(rows: &[&[&str]]) -> Dataset {
    Dataset::new(
        "T",
        vec!["title".into(), "brand".into()],
        rows.iter().enumerate().map(|(i, r)| Tuple::from_cells(i.to_string(), r)).collect(),
    )
    .unwrap()
}

#[test]
fn copy_has_unit_diagonal_and_missing_row_is_zero() {
    let d = dataset(&[&["sims 2", "aspyr"], &["chess", ""], &["", ""], &["golf", "ea"]]);
    let enc = Encoder::Hashed(HashedNgramEncoder::with_dimension(64, 0).unwrap());
    let e = enc.embed_dataset(&d).unwrap();
    let m = SimilarityMatrix::from_embeddings(&e, &e).unwrap();
    for i in [0, 1, 3] {
        assert!((m.get(i, i) - 1.0).abs() < 1e-12);
    }
    assert!(m.row(2).iter().all(|v| *v == 0.0));
    assert!((0..4).all(|i| m.get(i, 2) == 0.0));
}

#[test]
fn matrix_matches_scalar_recomputation() {
    let mut r = rng(22);
    let left = random_vectors(&mut r, 5, 6);
    let right = random_vectors(&mut r, 5, 6);
    let m = SimilarityMatrix::from_embeddings(&to_embeddings(&left), &to_embeddings(&right)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let mut dot = 0.0;
            let mut na = 0.0;
            let mut nb = 0.0;
            for k in 0..6 {
                dot += left[i][k] * right[j][k];
                na += left[i][k] * left[i][k];
                nb += right[j][k] * right[j][k];
            }
            let want = if na == 0.0 || nb == 0.0 { 0.0 } else { (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0) };
            assert!((m.get(i, j) - want).abs() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn clamping_preserves_positive_argmax() {
    let mut r = rng(23);
    for _ in 0..100 {
        let left = random_vectors(&mut r, 4, 3);
        let right = random_vectors(&mut r, 9, 3);
        let m = SimilarityMatrix::from_embeddings(&to_embeddings(&left), &to_embeddings(&right)).unwrap();
        for (i, l) in to_embeddings(&left).iter().enumerate() {
            let raw: Vec<f64> = to_embeddings(&right).iter().map(|v| cosine_similarity(l, v).unwrap()).collect();
            let best = raw.iter().copied().fold(f64::MIN, f64::max);
            if best <= 0.0 {
                continue;
            }
            let first = |xs: &[f64]| {
                let top = xs.iter().copied().fold(f64::MIN, f64::max);
                xs.iter().position(|x| *x == top)
            };
            assert_eq!(first(m.row(i)), first(&raw));
            assert!(m.row(i).iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn neighbor_lists_match_sorted_rows_and_columns() {
    let mut r = rng(24);
    for _ in 0..50 {
        let (rows, cols) = (r.random_range(1..=12), r.random_range(1..=12));
        let m = random_matrix(&mut r, rows, cols);
        let k = r.random_range(1..=5);
        let lists = NeighborLists::from_matrix(&SimilarityMatrix::from_rows(&m), k);
        for i in 0..rows {
            let mut want: Vec<usize> = (0..cols).collect();
            want.sort_by(|a, b| m[i][*b].partial_cmp(&m[i][*a]).unwrap().then(a.cmp(b)));
            want.truncate(k);
            assert_eq!(lists.row(i).iter().map(|n| n.index).collect::<Vec<_>>(), want);
        }
        for j in 0..cols {
            let mut want: Vec<usize> = (0..rows).collect();
            want.sort_by(|a, b| m[*b][j].partial_cmp(&m[*a][j]).unwrap().then(a.cmp(b)));
            want.truncate(k);
            assert_eq!(lists.col(j).iter().map(|n| n.index).collect::<Vec<_>>(), want);
        }
    }
}

#[test]
fn lookup_encoder() {
    let enc = LookupEncoder::new(2, [("a".to_string(), ev(&[3.0, 4.0])), ("z".to_string(), ev(&[0.0, 0.0]))]).unwrap();
    assert_eq!(enc.get("a").unwrap().as_slice(), &[0.6, 0.8]);
    assert!(enc.get("z").unwrap().is_zero());
    assert!(enc.get("b").is_err());
    assert!(LookupEncoder::new(3, [("a".to_string(), ev(&[1.0]))]).is_err());
}
