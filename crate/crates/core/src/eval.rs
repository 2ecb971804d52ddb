//! Match metrics, label-quality analysis and 3:1:1 candidate splits.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::labels::{NegativeLabels, PositiveLabels};
use crate::{Error, Result};

pub type Pair = (usize, usize);

/// Known true matches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub matches: BTreeSet<Pair>,
}

impl GroundTruth {
    pub fn new(pairs: impl IntoIterator<Item = Pair>) -> Self {
        Self {
            matches: pairs.into_iter().collect(),
        }
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.matches.contains(&pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// Set when a precision or recall denominator was zero (the value is
    /// then reported as 0).
    pub zero_denominator: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Scores predicted matches against the truth, both restricted to
/// `universe`. `tn` counts universe pairs that are neither predicted nor true.
pub fn score_predictions(predicted: &BTreeSet<Pair>, truth: &GroundTruth, universe: &[Pair]) -> MetricsReport {
    let universe: BTreeSet<Pair> = universe.iter().copied().collect();
    let pred: BTreeSet<Pair> = predicted.intersection(&universe).copied().collect();
    let gold: BTreeSet<Pair> = truth.matches.intersection(&universe).copied().collect();
    let tp = pred.intersection(&gold).count();
    let fp = pred.len() - tp;
    let fn_ = gold.len() - tp;
    let tn = universe.len() - pred.union(&gold).count();
    let (precision, z1) = ratio(tp, tp + fp);
    let (recall, z2) = ratio(tp, tp + fn_);
    MetricsReport {
        precision,
        recall,
        f1: f1_score(precision, recall),
        tp,
        fp,
        fn_,
        tn,
        zero_denominator: z1 || z2,
    }
}

/// Quality of generated labels. Positives split into `tp` (true matches) and
/// `fn` (wrong positives); negatives into `tn` (true non-matches) and `fp`
/// (actually matches).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelQualityReport {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: f64,
    pub tn: usize,
    pub fp: usize,
    pub tnr: f64,
    pub zero_denominator: bool,
}

pub fn score_labels(positives: &PositiveLabels, negatives: &NegativeLabels, truth: &GroundTruth) -> LabelQualityReport {
    let tp = positives.pairs().filter(|p| truth.contains(*p)).count();
    let fn_ = positives.len() - tp;
    let fp = negatives.pairs().filter(|p| truth.contains(*p)).count();
    let tn = negatives.len() - fp;
    let (tpr, z1) = ratio(tp, tp + fn_);
    let (tnr, z2) = ratio(tn, tn + fp);
    LabelQualityReport {
        tp,
        fn_,
        tpr,
        tn,
        fp,
        tnr,
        zero_denominator: z1 || z2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<Pair>,
    pub validation: Vec<Pair>,
    pub test: Vec<Pair>,
}

/// Seeded 3:1:1 partition: validation and test get `floor(n / 5)` pairs
/// each, train the rest. Each part is returned sorted.
pub fn split_candidates(candidates: &[Pair], seed: u64) -> Result<Split> {
    let n = candidates.len();
    if n < 5 {
        return Err(Error::TooFewCandidates(n));
    }
    let mut shuffled: Vec<Pair> = candidates.to_vec();
    shuffled.sort_unstable();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let fifth = n / 5;
    let mut test = shuffled[..fifth].to_vec();
    let mut validation = shuffled[fifth..2 * fifth].to_vec();
    let mut train = shuffled[2 * fifth..].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, validation, test })
}
