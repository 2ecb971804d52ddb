//! Pair classifier over joint sentence and graph features.
//!
//! Sentence embeddings pass through a trainable projection `P_s`; a pair is
//! described by `[|u - v| ; u * v ; |h - h'| ; h * h']` where `u, v` are the
//! projected sentence vectors and `h, h'` the graph embeddings. A linear layer
//! maps this to two logits. Training minimizes softmax cross-entropy plus
//! `mu` times the cosine-embedding loss on `(u, v)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::gnn::{relative_error, GradCheckReport};
use crate::labels::{NegativeLabels, PositiveLabels};
use crate::linalg::{self, Matrix};
use crate::optim::{Optimizer, Stepper};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsflConfig {
    pub lambda: f64,
    pub mu: f64,
    pub epochs: usize,
    /// Rate for the classifier and its bias.
    pub learning_rate: f64,
    /// Rate for the sentence projection `P_s`.
    pub projection_learning_rate: f64,
    pub decision_threshold: f64,
    pub seed: u64,
    /// When false the graph part of every feature vector is zero.
    pub use_graph_features: bool,
    /// Weight each class's cross-entropy terms by `n / (2 n_class)`.
    pub balance_classes: bool,
    pub optimizer: Optimizer,
}

impl Default for CsflConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            mu: 0.2,
            epochs: 100,
            learning_rate: 0.01,
            projection_learning_rate: 0.0003,
            decision_threshold: 0.5,
            seed: 0,
            use_graph_features: true,
            balance_classes: true,
            optimizer: Optimizer::default(),
        }
    }
}

impl CsflConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig("lambda must lie in [-1, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidConfig("mu must lie in [0, 1]".into()));
        }
        if !(self.learning_rate > 0.0 && self.projection_learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("collab learning rates must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.decision_threshold) {
            return Err(Error::InvalidConfig("decision threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsflParams {
    /// `n x n`
    pub projection: Matrix,
    /// `2 x (2n + 2c)`, row k produces logit k.
    pub classifier: Matrix,
    pub bias: [f64; 2],
}

impl CsflParams {
    /// `P_s = I + U(-0.01, 0.01)`, classifier and bias zero.
    pub fn init(sentence_dim: usize, graph_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut projection = Matrix::identity(sentence_dim);
        for x in projection.as_mut_slice() {
            *x += rng.random_range(-0.01..0.01);
        }
        Self {
            projection,
            classifier: Matrix::zeros(2, 2 * sentence_dim + 2 * graph_dim),
            bias: [0.0; 2],
        }
    }

    pub fn sentence_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn graph_dim(&self) -> usize {
        (self.classifier.cols() - 2 * self.sentence_dim()) / 2
    }

    fn zeros_like(&self) -> CsflParams {
        CsflParams {
            projection: Matrix::zeros(self.projection.rows(), self.projection.cols()),
            classifier: Matrix::zeros(2, self.classifier.cols()),
            bias: [0.0; 2],
        }
    }

    fn is_finite(&self) -> bool {
        self.projection.is_finite() && self.classifier.is_finite() && self.bias.iter().all(|b| b.is_finite())
    }

    fn flat(&self) -> impl Iterator<Item = &f64> {
        self.projection
            .as_slice()
            .iter()
            .chain(self.classifier.as_slice())
            .chain(&self.bias)
    }

    fn flat_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.projection
            .as_mut_slice()
            .iter_mut()
            .chain(self.classifier.as_mut_slice().iter_mut())
            .chain(self.bias.iter_mut())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    /// `[|u - v| ; u * v]`, length `2n`
    pub sentence: Vec<f64>,
    pub g_abs: Vec<f64>,
    pub g_dot: Vec<f64>,
}

impl PairFeatures {
    pub fn concat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.sentence.len() + 2 * self.g_abs.len());
        out.extend_from_slice(&self.sentence);
        out.extend_from_slice(&self.g_abs);
        out.extend_from_slice(&self.g_dot);
        out
    }
}

fn interaction(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let abs = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let dot = a.iter().zip(b).map(|(x, y)| x * y).collect();
    (abs, dot)
}

fn features_from_projected(u: &[f64], v: &[f64], h_i: &[f64], h_j: &[f64]) -> PairFeatures {
    let (s_abs, s_dot) = interaction(u, v);
    let mut sentence = s_abs;
    sentence.extend(s_dot);
    let (g_abs, g_dot) = interaction(h_i, h_j);
    PairFeatures { sentence, g_abs, g_dot }
}

pub fn pair_features(
    params: &CsflParams,
    e_i: &EmbeddingVector,
    e_j: &EmbeddingVector,
    h_i: &[f64],
    h_j: &[f64],
) -> Result<PairFeatures> {
    let n = params.sentence_dim();
    let c = params.graph_dim();
    for d in [e_i.dim(), e_j.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { left: n, right: d });
        }
    }
    for d in [h_i.len(), h_j.len()] {
        if d != c {
            return Err(Error::DimensionMismatch { left: c, right: d });
        }
    }
    let u = params.projection.mul_vec(e_i.as_slice());
    let v = params.projection.mul_vec(e_j.as_slice());
    Ok(features_from_projected(&u, &v, h_i, h_j))
}

pub fn logits(params: &CsflParams, x: &[f64]) -> [f64; 2] {
    [
        linalg::dot(params.classifier.row(0), x) + params.bias[0],
        linalg::dot(params.classifier.row(1), x) + params.bias[1],
    ]
}

/// `softmax(d)`, max-subtracted.
pub fn softmax(d: [f64; 2]) -> [f64; 2] {
    let m = d[0].max(d[1]);
    let e = [libm::exp(d[0] - m), libm::exp(d[1] - m)];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// `-log softmax(d)[y]`.
pub fn cross_entropy_loss(d: [f64; 2], y: usize) -> f64 {
    let m = d[0].max(d[1]);
    let lse = m + libm::log(libm::exp(d[0] - m) + libm::exp(d[1] - m));
    lse - d[y]
}

/// `1 - cos` for matches, `max(0, cos - lambda)` for non-matches.
pub fn cosine_embedding_loss(a: &[f64], b: &[f64], matched: bool, lambda: f64) -> f64 {
    let c = linalg::cosine(a, b);
    if matched {
        1.0 - c
    } else {
        (c - lambda).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabeledPair {
    pub left: usize,
    pub right: usize,
    pub matched: bool,
}

/// Positives (label 1) followed by negatives (label 0).
pub fn labeled_pairs(positives: &PositiveLabels, negatives: &NegativeLabels) -> Vec<LabeledPair> {
    positives
        .pairs()
        .map(|(left, right)| LabeledPair { left, right, matched: true })
        .chain(negatives.pairs().map(|(left, right)| LabeledPair { left, right, matched: false }))
        .collect()
}

/// Per-tuple inputs for both datasets.
#[derive(Debug, Clone, Copy)]
pub struct PairInputs<'a> {
    pub left_sentence: &'a [EmbeddingVector],
    pub right_sentence: &'a [EmbeddingVector],
    pub left_graph: &'a Matrix,
    pub right_graph: &'a Matrix,
}

impl PairInputs<'_> {
    fn validate(&self, params: &CsflParams, pairs: impl Iterator<Item = (usize, usize)>) -> Result<()> {
        let n = params.sentence_dim();
        let c = params.graph_dim();
        for v in self.left_sentence.iter().chain(self.right_sentence) {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { left: n, right: v.dim() });
            }
        }
        for g in [self.left_graph, self.right_graph] {
            if g.cols() != c {
                return Err(Error::DimensionMismatch { left: c, right: g.cols() });
            }
        }
        let ln = self.left_sentence.len().min(self.left_graph.rows());
        let rn = self.right_sentence.len().min(self.right_graph.rows());
        for (l, r) in pairs {
            if l >= ln {
                return Err(Error::UnknownTuple { index: l, len: ln });
            }
            if r >= rn {
                return Err(Error::UnknownTuple { index: r, len: rn });
            }
        }
        Ok(())
    }
}

fn project_all(params: &CsflParams, vs: &[EmbeddingVector]) -> Matrix {
    let n = params.sentence_dim();
    let mut out = Matrix::zeros(vs.len(), n);
    for (i, v) in vs.iter().enumerate() {
        params.projection.mul_vec_into(v.as_slice(), out.row_mut(i));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    /// Summed (class-weighted) cross-entropy.
    pub l1: f64,
    /// Summed cosine-embedding loss.
    pub l2: f64,
    /// `l1 + mu * l2`.
    pub total: f64,
}

/// `L_c = L1 + mu * L2` summed over `examples`, as a function of the params.
pub struct CollabObjective<'a> {
    pub inputs: PairInputs<'a>,
    pub examples: &'a [LabeledPair],
    pub lambda: f64,
    pub mu: f64,
    /// Cross-entropy weight of label 0 and label 1.
    pub class_weights: [f64; 2],
}

/// `n / (2 n_class)` per class, so both classes carry equal total weight and
/// a balanced set gets weights of 1. A class without examples gets weight 1.
pub fn balanced_weights(examples: &[LabeledPair]) -> [f64; 2] {
    let pos = examples.iter().filter(|e| e.matched).count();
    let counts = [examples.len() - pos, pos];
    let n = examples.len() as f64;
    counts.map(|c| if c == 0 { 1.0 } else { n / (2.0 * c as f64) })
}

impl CollabObjective<'_> {
    pub fn evaluate(&self, params: &CsflParams, with_grads: bool) -> (LossParts, Option<CsflParams>) {
        let n = params.sentence_dim();
        let u_all = project_all(params, self.inputs.left_sentence);
        let v_all = project_all(params, self.inputs.right_sentence);
        let mut grads = with_grads.then(|| params.zeros_like());
        let mut du_all = Matrix::zeros(u_all.rows(), n);
        let mut dv_all = Matrix::zeros(v_all.rows(), n);
        let (mut l1, mut l2) = (0.0, 0.0);
        let width = params.classifier.cols();
        let mut dx = vec![0.0; width];
        for ex in self.examples {
            let u = u_all.row(ex.left);
            let v = v_all.row(ex.right);
            let feats = features_from_projected(
                u,
                v,
                self.inputs.left_graph.row(ex.left),
                self.inputs.right_graph.row(ex.right),
            );
            let x = feats.concat();
            let d = logits(params, &x);
            let y = usize::from(ex.matched);
            let w = self.class_weights[y];
            l1 += w * cross_entropy_loss(d, y);
            l2 += cosine_embedding_loss(u, v, ex.matched, self.lambda);
            let Some(g) = grads.as_mut() else { continue };
            let p = softmax(d);
            let dd = [
                w * (p[0] - f64::from(u8::from(y == 0))),
                w * (p[1] - f64::from(u8::from(y == 1))),
            ];
            for k in 0..2 {
                g.bias[k] += dd[k];
                for (gw, xv) in g.classifier.row_mut(k).iter_mut().zip(&x) {
                    *gw += dd[k] * xv;
                }
            }
            dx.iter_mut().for_each(|v| *v = 0.0);
            params.classifier.mul_transposed_acc(&dd, &mut dx);
            let du = du_all.row_mut(ex.left);
            let mut dv = vec![0.0; n];
            for k in 0..n {
                let diff = u[k] - v[k];
                let sign = if diff > 0.0 {
                    1.0
                } else if diff < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                du[k] += dx[k] * sign + dx[n + k] * v[k];
                dv[k] += -dx[k] * sign + dx[n + k] * u[k];
            }
            // cosine-embedding term
            let c = linalg::cosine(u, v);
            let dcos = if ex.matched {
                -1.0
            } else if c - self.lambda > 0.0 {
                1.0
            } else {
                0.0
            };
            let mut dcu = vec![0.0; n];
            linalg::cosine_backward(u, v, self.mu * dcos, &mut dcu, &mut dv);
            for (a, b) in du.iter_mut().zip(&dcu) {
                *a += b;
            }
            for (a, b) in dv_all.row_mut(ex.right).iter_mut().zip(&dv) {
                *a += b;
            }
        }
        if let Some(g) = grads.as_mut() {
            for (du, src) in [(&du_all, self.inputs.left_sentence), (&dv_all, self.inputs.right_sentence)] {
                for (t, e) in src.iter().enumerate() {
                    let row = du.row(t);
                    if row.iter().any(|x| *x != 0.0) {
                        g.projection.add_outer(row, e.as_slice(), 1.0);
                    }
                }
            }
        }
        (
            LossParts {
                l1,
                l2,
                total: l1 + self.mu * l2,
            },
            grads,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollabModel {
    pub params: CsflParams,
    /// `trace[e]` is the summed `L_c` before update `e`; the last entry is
    /// the final loss.
    pub trace: Vec<LossParts>,
}

/// Full-batch gradient descent. Steps follow the gradient of the mean
/// per-pair loss; the trace holds sums.
pub fn train_collab(examples: &[LabeledPair], inputs: PairInputs<'_>, cfg: &CsflConfig) -> Result<CollabModel> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::NoLabels);
    }
    let sentence_dim = inputs
        .left_sentence
        .first()
        .or(inputs.right_sentence.first())
        .map_or(0, EmbeddingVector::dim);
    let params = CsflParams::init(sentence_dim, inputs.left_graph.cols(), cfg.seed);
    inputs.validate(&params, examples.iter().map(|e| (e.left, e.right)))?;
    train_collab_from(params, examples, inputs, cfg)
}

pub fn train_collab_from(
    mut params: CsflParams,
    examples: &[LabeledPair],
    inputs: PairInputs<'_>,
    cfg: &CsflConfig,
) -> Result<CollabModel> {
    let objective = CollabObjective {
        inputs,
        examples,
        lambda: cfg.lambda,
        mu: cfg.mu,
        class_weights: if cfg.balance_classes {
            balanced_weights(examples)
        } else {
            [1.0, 1.0]
        },
    };
    let mut projection = Stepper::new(cfg.optimizer, cfg.projection_learning_rate, params.projection.as_slice().len());
    let mut classifier = Stepper::new(cfg.optimizer, cfg.learning_rate, params.classifier.as_slice().len() + 2);
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let last = epoch == cfg.epochs;
        let (loss, grads) = objective.evaluate(&params, !last);
        if !loss.total.is_finite() {
            return Err(Error::NonFiniteLoss { stage: "train-collab", epoch });
        }
        trace.push(loss);
        if let Some(g) = grads {
            projection.step(params.projection.as_mut_slice().iter_mut(), g.projection.as_slice().iter(), examples.len());
            classifier.step(
                params.classifier.as_mut_slice().iter_mut().chain(params.bias.iter_mut()),
                g.classifier.as_slice().iter().chain(&g.bias),
                examples.len(),
            );
            if !params.is_finite() {
                return Err(Error::NonFiniteLoss { stage: "train-collab", epoch });
            }
        }
    }
    Ok(CollabModel { params, trace })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub left: usize,
    pub right: usize,
    pub probability: f64,
    pub matched: bool,
}

/// Match probability `softmax(d)[1]`; a pair is a match iff the probability
/// is strictly above `threshold`.
pub fn predict(
    params: &CsflParams,
    pairs: &[(usize, usize)],
    inputs: PairInputs<'_>,
    threshold: f64,
) -> Result<Vec<Prediction>> {
    inputs.validate(params, pairs.iter().copied())?;
    let u_all = project_all(params, inputs.left_sentence);
    let v_all = project_all(params, inputs.right_sentence);
    Ok(pairs
        .iter()
        .map(|&(left, right)| {
            let f = features_from_projected(
                u_all.row(left),
                v_all.row(right),
                inputs.left_graph.row(left),
                inputs.right_graph.row(right),
            );
            let probability = softmax(logits(params, &f.concat()))[1];
            Prediction {
                left,
                right,
                probability,
                matched: probability > threshold,
            }
        })
        .collect())
}

/// Analytic vs central-difference gradient of `L_c` w.r.t. `P_s`, the
/// classifier and its bias on a random toy instance.
pub fn gradient_check(seed: u64, step: f64) -> GradCheckReport {
    let (n, c, tuples) = (3, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vecs = |count: usize| -> Vec<EmbeddingVector> {
        (0..count)
            .map(|_| {
                let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                linalg::normalize(&mut v);
                EmbeddingVector::new(v).expect("finite")
            })
            .collect()
    };
    let left_sentence = vecs(tuples);
    let right_sentence = vecs(tuples);
    let graph = |rng: &mut ChaCha8Rng| {
        let mut m = Matrix::zeros(tuples, c);
        for x in m.as_mut_slice() {
            *x = rng.random_range(-1.0..1.0);
        }
        m
    };
    let left_graph = graph(&mut rng);
    let right_graph = graph(&mut rng);
    let mut params = CsflParams::init(n, c, seed);
    for x in params.flat_mut() {
        *x += rng.random_range(-0.5..0.5);
    }
    let examples: Vec<LabeledPair> = (0..tuples)
        .flat_map(|i| (0..tuples).map(move |j| LabeledPair { left: i, right: j, matched: i == j }))
        .collect();
    let objective = CollabObjective {
        inputs: PairInputs {
            left_sentence: &left_sentence,
            right_sentence: &right_sentence,
            left_graph: &left_graph,
            right_graph: &right_graph,
        },
        examples: &examples,
        // negative margin keeps the non-match hinge active on most pairs
        lambda: -0.5,
        mu: 0.2,
        class_weights: balanced_weights(&examples),
    };
    let (loss, grads) = objective.evaluate(&params, true);
    let grads = grads.expect("requested gradients");
    let mut numeric = params.zeros_like();
    let count = params.flat().count();
    let mut p = params.clone();
    for k in 0..count {
        let orig = *p.flat().nth(k).expect("index in range");
        *p.flat_mut().nth(k).expect("index in range") = orig + step;
        let plus = objective.evaluate(&p, false).0.total;
        *p.flat_mut().nth(k).expect("index in range") = orig - step;
        let minus = objective.evaluate(&p, false).0.total;
        *p.flat_mut().nth(k).expect("index in range") = orig;
        *numeric.flat_mut().nth(k).expect("index in range") = (plus - minus) / (2.0 * step);
    }
    let max_relative_error = grads
        .flat()
        .zip(numeric.flat())
        .map(|(a, b)| relative_error(*a, *b))
        .fold(0.0, f64::max);
    GradCheckReport {
        max_relative_error,
        parameters: count,
        loss: loss.total,
    }
}
