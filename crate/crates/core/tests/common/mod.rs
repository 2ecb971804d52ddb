//! Brute-force oracles and random fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use erpipe_core::dataset::{Dataset, Tuple};
use erpipe_core::embedding::EmbeddingVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries drawn from a coarse grid so that ties are common.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let coarse = rng.random_bool(0.5);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if coarse {
                        f64::from(rng.random_range(0..=20u32)) / 20.0
                    } else {
                        rng.random_range(0.0..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// First index of the maximum (ties go to the lower index).
fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Largest value after removing position `skip`, or 0 if nothing remains.
fn second_best(values: impl Iterator<Item = f64>, skip: usize) -> f64 {
    values
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, v)| v)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .unwrap_or(0.0)
}

/// Checks the three acceptance conditions for every cell by full scan.
pub fn rplg_oracle(m: &[Vec<f64>], theta: f64) -> Vec<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let row_best = argmax(m[i].iter().copied()) == Some(j);
            let col_best = argmax((0..rows).map(|r| m[r][j])) == Some(i);
            if !(row_best && col_best) {
                continue;
            }
            let d1 = m[i][j] - second_best(m[i].iter().copied(), j);
            let d2 = m[i][j] - second_best((0..rows).map(|r| m[r][j]), i);
            if d1 >= theta && d2 >= theta {
                out.push((i, j));
            }
        }
    }
    out
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Sorts the full similarity list of `query` within `pool` and applies
/// skip/take.
pub fn sorted_neighbors(query: &[f64], pool: &[Vec<f64>], skip: usize, take: usize) -> Vec<usize> {
    let mut all: Vec<(usize, f64)> = pool.iter().enumerate().map(|(i, v)| (i, cosine(query, v))).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.into_iter().skip(skip).take(take).map(|(i, _)| i).collect()
}

/// Negative pairs with their source positive, in generation order.
pub fn snlg_oracle(
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    positives: &[(usize, usize)],
    epsilon: usize,
    skip: usize,
) -> Vec<(usize, usize, usize)> {
    let pos: BTreeSet<(usize, usize)> = positives.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (s, &(i, j)) in positives.iter().enumerate() {
        let mut cands: Vec<(usize, usize)> =
            sorted_neighbors(&left[i], left, skip, epsilon).into_iter().map(|x| (x, j)).collect();
        cands.extend(sorted_neighbors(&right[j], right, skip, epsilon).into_iter().map(|y| (i, y)));
        for c in cands {
            if !pos.contains(&c) && seen.insert(c) {
                out.push((c.0, c.1, s));
            }
        }
    }
    out
}

/// Bidirectional top-k by sorting every row and column.
pub fn block_oracle(m: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let top = |mut v: Vec<(usize, f64)>| {
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        v.into_iter().take(k).map(|(i, _)| i).collect::<Vec<_>>()
    };
    let mut out = BTreeSet::new();
    for i in 0..rows {
        for j in top((0..cols).map(|j| (j, m[i][j])).collect()) {
            out.insert((i, j));
        }
    }
    for j in 0..cols {
        for i in top((0..rows).map(|i| (i, m[i][j])).collect()) {
            out.insert((i, j));
        }
    }
    out.into_iter().collect()
}

pub fn random_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| f64::from(rng.random_range(-3..=3i32))).collect())
        .collect()
}

pub fn to_embeddings(vs: &[Vec<f64>]) -> Vec<EmbeddingVector> {
    vs.iter().map(|v| EmbeddingVector::new(v.clone()).unwrap()).collect()
}

/// Small vocabulary with case and spacing variants, so normalization and
/// value sharing across attributes both get exercised.
const WORDS: &[&str] = &["sims", "Sims", "aspyr media", "aspyr  media", "2", "pack", "NULL", "", "deluxe", "Deluxe "];

pub fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let m = rng.random_range(1..=5);
    let n = rng.random_range(0..=12);
    let attributes = (0..m).map(|a| format!("a{a}")).collect();
    let tuples = (0..n)
        .map(|t| {
            let cells: Vec<String> = (0..m)
                .map(|_| {
                    let w = WORDS[rng.random_range(0..WORDS.len())];
                    if rng.random_bool(0.3) {
                        format!("{w} {}", rng.random_range(0..4))
                    } else {
                        w.to_string()
                    }
                })
                .collect();
            Tuple::from_cells(format!("t{t}"), &cells)
        })
        .collect();
    Dataset::new("R", attributes, tuples).unwrap()
}

/// Distinct normalized values and non-missing cells, counted independently of
/// the library's normalization helpers.
pub fn cell_census(d: &Dataset) -> (BTreeSet<String>, usize) {
    let mut values = BTreeSet::new();
    let mut cells = 0;
    for t in d.tuples() {
        for v in t.values.iter().flatten() {
            values.insert(v.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" "));
            cells += 1;
        }
    }
    (values, cells)
}

/// Classic dynamic-programming edit distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}
