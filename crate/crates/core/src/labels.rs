//! Automatic label generation.
//!
//! Positives are mutually-most-similar pairs whose top-1/top-2 similarity
//! gap is at least `theta` on both sides. Negatives replace one side of each
//! positive with one of its nearest neighbors inside the same dataset,
//! skipping the closest few (the tuple itself and likely duplicates).

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embedding::{rank_order, EmbeddingVector, Neighbor, NeighborLists, SimilarityMatrix};
use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RplgConfig {
    pub theta: f64,
}

impl Default for RplgConfig {
    fn default() -> Self {
        Self { theta: 0.03 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnlgConfig {
    pub epsilon: usize,
    pub skip_top: usize,
}

impl Default for SnlgConfig {
    fn default() -> Self {
        Self {
            epsilon: 10,
            skip_top: 2,
        }
    }
}

impl RplgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0) {
            return Err(Error::InvalidConfig("theta must be >= 0".into()));
        }
        Ok(())
    }
}

impl SnlgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon == 0 {
            return Err(Error::InvalidConfig("epsilon must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveLabel {
    pub left: usize,
    pub right: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NegativeLabel {
    pub left: usize,
    pub right: usize,
    /// Index into the positive list this negative was derived from.
    pub source: usize,
}

/// Positive pairs ordered by left index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PositiveLabels(pub Vec<PositiveLabel>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NegativeLabels(pub Vec<NegativeLabel>);

impl PositiveLabels {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|p| (p.left, p.right))
    }
}

impl NegativeLabels {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|n| (n.left, n.right))
    }

    /// Attributes externally supplied negatives to positives: a negative that
    /// shares its right tuple with a positive belongs to it, else one sharing
    /// the left tuple, else positives are assigned round-robin. On SNLG output
    /// this reproduces the original sources whenever they are unambiguous.
    pub fn attribute(pairs: &[(usize, usize)], positives: &PositiveLabels) -> Self {
        let mut out = Vec::with_capacity(pairs.len());
        let mut rr = 0usize;
        for &(left, right) in pairs {
            let by_right = positives.0.iter().position(|p| p.right == right);
            let by_left = positives.0.iter().position(|p| p.left == left);
            let source = match by_right.or(by_left) {
                Some(s) => s,
                None if positives.is_empty() => 0,
                None => {
                    rr += 1;
                    (rr - 1) % positives.len()
                }
            };
            out.push(NegativeLabel { left, right, source });
        }
        NegativeLabels(out)
    }
}

/// Reliable positive label generation over a dense similarity matrix.
pub fn rplg(m: &SimilarityMatrix, cfg: &RplgConfig) -> PositiveLabels {
    rplg_neighbors(&NeighborLists::from_matrix(m, 2), cfg)
}

/// [`rplg`] over neighbor lists of depth >= 2.
///
/// A missing second-best neighbor (a side with a single tuple) counts as
/// similarity 0.
pub fn rplg_neighbors(lists: &NeighborLists, cfg: &RplgConfig) -> PositiveLabels {
    assert!(lists.k() >= 2, "rplg needs the two best neighbors");
    let second = |l: &[Neighbor]| l.get(1).map_or(0.0, |n| n.score);
    let mut out = Vec::new();
    for i in 0..lists.row_count() {
        let row = lists.row(i);
        let Some(best) = row.first() else { continue };
        let col = lists.col(best.index);
        if col.first().map(|n| n.index) != Some(i) {
            continue;
        }
        let delta1 = best.score - second(row);
        let delta2 = best.score - second(col);
        if delta1 >= cfg.theta && delta2 >= cfg.theta {
            out.push(PositiveLabel {
                left: i,
                right: best.index,
                score: best.score,
            });
        }
    }
    PositiveLabels(out)
}

/// Indices of `query`'s neighbors among `pool` ranked by raw cosine (ties by
/// lower index), after dropping the first `skip` ranks, keeping `take`.
pub fn nearest_within(
    query: &EmbeddingVector,
    pool: &[EmbeddingVector],
    skip: usize,
    take: usize,
) -> Vec<usize> {
    let mut ranked: Vec<Neighbor> = pool
        .iter()
        .enumerate()
        .map(|(index, v)| Neighbor {
            index,
            score: linalg::cosine(query.as_slice(), v.as_slice()),
        })
        .collect();
    let keep = (skip + take).min(ranked.len());
    if keep < ranked.len() && keep > 0 {
        ranked.select_nth_unstable_by(keep - 1, rank_order);
        ranked.truncate(keep);
    }
    ranked.sort_by(rank_order);
    ranked.into_iter().skip(skip).take(take).map(|n| n.index).collect()
}

/// Similarity-based negative label generation.
///
/// For each positive `(i, i')`, pairs `(x, i')` for `x` among the epsilon
/// nearest neighbors of `i` in the left dataset and `(i, y)` for `y` among
/// those of `i'` in the right dataset. Pairs that are positives are dropped;
/// duplicates keep their first source.
pub fn snlg(
    left: &[EmbeddingVector],
    right: &[EmbeddingVector],
    positives: &PositiveLabels,
    cfg: &SnlgConfig,
) -> Result<NegativeLabels> {
    for p in &positives.0 {
        if p.left >= left.len() {
            return Err(Error::UnknownTuple {
                index: p.left,
                len: left.len(),
            });
        }
        if p.right >= right.len() {
            return Err(Error::UnknownTuple {
                index: p.right,
                len: right.len(),
            });
        }
    }
    let positive_set: BTreeSet<(usize, usize)> = positives.pairs().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (source, p) in positives.0.iter().enumerate() {
        let lefts = nearest_within(&left[p.left], left, cfg.skip_top, cfg.epsilon);
        let rights = nearest_within(&right[p.right], right, cfg.skip_top, cfg.epsilon);
        let candidates = lefts
            .into_iter()
            .map(|x| (x, p.right))
            .chain(rights.into_iter().map(|y| (p.left, y)));
        for pair in candidates {
            if positive_set.contains(&pair) || !seen.insert(pair) {
                continue;
            }
            out.push(NegativeLabel {
                left: pair.0,
                right: pair.1,
                source,
            });
        }
    }
    Ok(NegativeLabels(out))
}
