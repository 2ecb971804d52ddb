//! Tuple embeddings and the tuple similarity matrix.
//!
//! The built-in encoder hashes lowercase character 2/3/4-grams of the
//! serialized tuple into a fixed number of buckets and L2-normalizes the
//! counts. Precomputed vectors (e.g. from a sentence encoder) can be supplied
//! instead through [`LookupEncoder`], keyed by tuple id.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{serialize_tuple, Dataset};
use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }
}

/// Cosine similarity in `[-1, 1]`; zero when either vector is zero.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(linalg::cosine(&a.0, &b.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProviderSpec {
    HashedNgram {
        dimension: usize,
        #[serde(default = "default_ngram_sizes")]
        ngram_sizes: Vec<usize>,
        #[serde(default)]
        seed: u64,
    },
    /// Precomputed vectors, one file per dataset.
    File {
        dimension: usize,
        left_path: String,
        right_path: String,
    },
}

fn default_ngram_sizes() -> Vec<usize> {
    vec![2, 3, 4]
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec::HashedNgram {
            dimension: 256,
            ngram_sizes: default_ngram_sizes(),
            seed: 0,
        }
    }
}

impl ProviderSpec {
    pub fn dimension(&self) -> usize {
        match self {
            ProviderSpec::HashedNgram { dimension, .. } | ProviderSpec::File { dimension, .. } => {
                *dimension
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension() == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        if let ProviderSpec::HashedNgram { ngram_sizes, .. } = self {
            if ngram_sizes.is_empty() || ngram_sizes.contains(&0) {
                return Err(Error::InvalidConfig("n-gram sizes must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashedNgramEncoder {
    dimension: usize,
    ngram_sizes: Vec<usize>,
    seed: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_bytes(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl HashedNgramEncoder {
    pub fn new(dimension: usize, ngram_sizes: Vec<usize>, seed: u64) -> Result<Self> {
        let spec = ProviderSpec::HashedNgram {
            dimension,
            ngram_sizes,
            seed,
        };
        spec.validate()?;
        let ProviderSpec::HashedNgram {
            dimension,
            ngram_sizes,
            seed,
        } = spec
        else {
            unreachable!()
        };
        Ok(Self {
            dimension,
            ngram_sizes,
            seed,
        })
    }

    pub fn with_dimension(dimension: usize, seed: u64) -> Result<Self> {
        Self::new(dimension, default_ngram_sizes(), seed)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn bucket(&self, n: usize, gram: &[char]) -> usize {
        let mut h = fnv_bytes(FNV_OFFSET, &self.seed.to_le_bytes());
        h = fnv_bytes(h, &(n as u64).to_le_bytes());
        let mut buf = [0u8; 4];
        for c in gram {
            h = fnv_bytes(h, c.encode_utf8(&mut buf).as_bytes());
        }
        (splitmix(h) % self.dimension as u64) as usize
    }

    /// Deterministic, L2-normalized; the empty string maps to the zero vector.
    /// Text shorter than every n-gram size is hashed as a single gram.
    pub fn embed_text(&self, text: &str) -> EmbeddingVector {
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        let mut v = vec![0.0; self.dimension];
        if chars.is_empty() {
            return EmbeddingVector(v);
        }
        let mut grams = 0usize;
        for &n in &self.ngram_sizes {
            if chars.len() < n {
                continue;
            }
            for w in chars.windows(n) {
                v[self.bucket(n, w)] += 1.0;
                grams += 1;
            }
        }
        if grams == 0 {
            v[self.bucket(chars.len(), &chars)] += 1.0;
        }
        linalg::normalize(&mut v);
        EmbeddingVector(v)
    }
}

/// Precomputed vectors keyed by tuple id.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupEncoder {
    dimension: usize,
    vectors: BTreeMap<String, EmbeddingVector>,
}

impl LookupEncoder {
    pub fn new(dimension: usize, entries: impl IntoIterator<Item = (String, EmbeddingVector)>) -> Result<Self> {
        let mut vectors = BTreeMap::new();
        for (id, v) in entries {
            if v.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    left: dimension,
                    right: v.dim(),
                });
            }
            vectors.insert(id, v);
        }
        Ok(Self { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Looks up `id`. Stored vectors are normalized on the way out unless zero.
    pub fn get(&self, id: &str) -> Result<EmbeddingVector> {
        let v = self
            .vectors
            .get(id)
            .ok_or_else(|| Error::MissingEmbedding(id.into()))?;
        let mut out = v.0.clone();
        linalg::normalize(&mut out);
        Ok(EmbeddingVector(out))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Hashed(HashedNgramEncoder),
    Lookup(LookupEncoder),
}

impl Encoder {
    pub fn dimension(&self) -> usize {
        match self {
            Encoder::Hashed(e) => e.dimension(),
            Encoder::Lookup(e) => e.dimension(),
        }
    }

    /// For the hashed encoder `key` is the text to embed; for a lookup encoder
    /// it is the tuple id.
    pub fn embed_text(&self, key: &str) -> Result<EmbeddingVector> {
        match self {
            Encoder::Hashed(e) => Ok(e.embed_text(key)),
            Encoder::Lookup(e) => e.get(key),
        }
    }

    /// Sentence embedding of every tuple of `dataset`, in tuple order.
    pub fn embed_dataset(&self, dataset: &Dataset) -> Result<Vec<EmbeddingVector>> {
        dataset
            .tuples()
            .iter()
            .map(|t| match self {
                Encoder::Hashed(e) => Ok(e.embed_text(serialize_tuple(dataset, t).as_str())),
                Encoder::Lookup(e) => e.get(&t.id),
            })
            .collect()
    }
}

fn check_dims(left: &[EmbeddingVector], right: &[EmbeddingVector]) -> Result<()> {
    let dim = left.first().or(right.first()).map_or(0, EmbeddingVector::dim);
    for v in left.iter().chain(right) {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
    }
    Ok(())
}

/// One row of the similarity matrix: clamped cosine of `left` against every
/// vector of `right`.
pub fn similarity_row(left: &EmbeddingVector, right: &[EmbeddingVector]) -> Vec<f64> {
    right
        .iter()
        .map(|r| linalg::cosine(&left.0, &r.0).clamp(0.0, 1.0))
        .collect()
}

/// Dense `|T| x |T'|` matrix of clamped cosine similarities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_embeddings(left: &[EmbeddingVector], right: &[EmbeddingVector]) -> Result<Self> {
        check_dims(left, right)?;
        let mut data = Vec::with_capacity(left.len() * right.len());
        for l in left {
            data.extend(similarity_row(l, right));
        }
        Ok(Self {
            rows: left.len(),
            cols: right.len(),
            data,
        })
    }

    /// Entries are clamped into `[0, 1]`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged similarity rows");
            data.extend(r.as_ref().iter().map(|v| v.clamp(0.0, 1.0)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub score: f64,
}

/// Higher score first, then lower index.
pub fn rank_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.index.cmp(&b.index))
}

fn push_bounded(list: &mut Vec<Neighbor>, k: usize, n: Neighbor) {
    if k == 0 {
        return;
    }
    if list.len() == k && rank_order(&n, &list[k - 1]) != Ordering::Less {
        return;
    }
    let pos = list.partition_point(|x| rank_order(x, &n) == Ordering::Less);
    list.insert(pos, n);
    list.truncate(k);
}

/// Per-row and per-column top-k of a similarity matrix, ties broken by lower
/// index. Built incrementally so the full matrix never has to be held.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborLists {
    k: usize,
    rows: Vec<Vec<Neighbor>>,
    cols: Vec<Vec<Neighbor>>,
}

impl NeighborLists {
    pub fn new(rows: usize, cols: usize, k: usize) -> Self {
        Self {
            k,
            rows: vec![Vec::new(); rows],
            cols: vec![Vec::new(); cols],
        }
    }

    pub fn from_matrix(m: &SimilarityMatrix, k: usize) -> Self {
        let mut lists = Self::new(m.rows(), m.cols(), k);
        for i in 0..m.rows() {
            lists.push_row(i, m.row(i));
        }
        lists
    }

    /// Feeds row `i` of the matrix. Rows may arrive in any order.
    pub fn push_row(&mut self, i: usize, row: &[f64]) {
        assert_eq!(row.len(), self.cols.len(), "row width");
        let k = self.k;
        let mut top = core::mem::take(&mut self.rows[i]);
        for (j, &score) in row.iter().enumerate() {
            push_bounded(&mut top, k, Neighbor { index: j, score });
            push_bounded(&mut self.cols[j], k, Neighbor { index: i, score });
        }
        self.rows[i] = top;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[Neighbor] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &[Neighbor] {
        &self.cols[j]
    }
}
