//! Graph feature learning over multi-relational graphs.
//!
//! Each layer sends `W·(h_j + r_a)` along every edge (both directions),
//! averages incoming messages and applies a residual update
//! `h_i <- normalize(h_i + mean)`. Parameters (`W` per layer, one relation
//! vector per attribute name) are shared by the two datasets' graphs and
//! trained with the margin loss
//! `sum_P sum_{N_i} [d(e_i, e_i') + gamma - d(e_j, e_k)]_+`, `d = 1 - cos`.
//! Gradients are computed by hand; [`gradient_check`] compares them with
//! central finite differences.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::HashedNgramEncoder;
use crate::graph::MultiRelGraph;
use crate::labels::{NegativeLabels, PositiveLabels};
use crate::linalg::{self, Matrix};
use crate::optim::{Optimizer, Stepper};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarginLossConfig {
    pub gamma: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub optimizer: Optimizer,
}

impl Default for MarginLossConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            epochs: 50,
            learning_rate: 0.002,
            negatives_per_positive: 20,
            optimizer: Optimizer::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphTrainConfig {
    pub dim: usize,
    pub layers: usize,
    pub seed: u64,
    pub margin: MarginLossConfig,
}

impl Default for GraphTrainConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            layers: 1,
            seed: 0,
            margin: MarginLossConfig::default(),
        }
    }
}

impl GraphTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.layers == 0 {
            return Err(Error::InvalidConfig("graph dim and layers must be positive".into()));
        }
        if !(self.margin.gamma >= 0.0) {
            return Err(Error::InvalidConfig("gamma must be >= 0".into()));
        }
        if !(self.margin.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("graph learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    pub dim: usize,
    /// `W` per layer, `dim x dim`.
    pub weights: Vec<Matrix>,
    pub relations: Vec<String>,
    /// One row per relation name.
    pub relation_vectors: Matrix,
}

impl GnnParams {
    /// `W = I + U(-0.01, 0.01)`, relation vectors zero.
    pub fn init(dim: usize, layers: usize, relations: Vec<String>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..layers)
            .map(|_| {
                let mut w = Matrix::identity(dim);
                for x in w.as_mut_slice() {
                    *x += rng.random_range(-0.01..0.01);
                }
                w
            })
            .collect();
        let relation_vectors = Matrix::zeros(relations.len(), dim);
        Self {
            dim,
            weights,
            relations,
            relation_vectors,
        }
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == name)
    }

    fn zeros_like(&self) -> GnnGrads {
        GnnGrads {
            weights: self.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
            relation_vectors: Matrix::zeros(self.relation_vectors.rows(), self.dim),
        }
    }

    fn flat_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .flat_map(|w| w.as_mut_slice().iter_mut())
            .chain(self.relation_vectors.as_mut_slice().iter_mut())
    }

    fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.as_slice().len()).sum::<usize>() + self.relation_vectors.as_slice().len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite) && self.relation_vectors.is_finite()
    }
}

/// Relation names of both graphs in first-seen order.
pub fn shared_relations(graphs: &[&MultiRelGraph]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for g in graphs {
        for r in g.relations() {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnGrads {
    pub weights: Vec<Matrix>,
    pub relation_vectors: Matrix,
}

impl GnnGrads {
    fn flat(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.as_slice().iter())
            .chain(self.relation_vectors.as_slice())
    }

    fn add(&mut self, other: &GnnGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.sub_scaled(b, -1.0);
        }
        self.relation_vectors.sub_scaled(&other.relation_vectors, -1.0);
    }
}

/// Per-node vectors, one row per node (tuple nodes first).
pub type NodeEmbeddings = Matrix;

/// Value nodes get the encoder's vector for their normalized text; tuple nodes
/// the normalized mean of their values (zero when isolated).
pub fn init_embeddings(g: &MultiRelGraph, encoder: &HashedNgramEncoder) -> NodeEmbeddings {
    let dim = encoder.dimension();
    let mut h = Matrix::zeros(g.node_count(), dim);
    for (v, text) in g.values().iter().enumerate() {
        let e = encoder.embed_text(text);
        h.row_mut(g.value_node(v)).copy_from_slice(e.as_slice());
    }
    let mut degree = vec![0usize; g.tuple_count()];
    for e in g.edges() {
        degree[e.tuple] += 1;
        let src = h.row(g.value_node(e.value)).to_vec();
        for (a, b) in h.row_mut(e.tuple).iter_mut().zip(&src) {
            *a += b;
        }
    }
    for (t, &d) in degree.iter().enumerate() {
        if d > 0 {
            let row = h.row_mut(t);
            for x in row.iter_mut() {
                *x /= d as f64;
            }
            linalg::normalize(row);
        }
    }
    h
}

/// Undirected adjacency with relation-parameter indices.
#[derive(Debug, Clone)]
pub struct Adjacency {
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl Adjacency {
    pub fn new(g: &MultiRelGraph, params: &GnnParams) -> Result<Self> {
        let rel: Vec<usize> = g
            .relations()
            .iter()
            .map(|r| params.relation_index(r).ok_or_else(|| Error::UnknownAttribute(r.clone())))
            .collect::<Result<_>>()?;
        let mut neighbors = vec![Vec::new(); g.node_count()];
        for e in g.edges() {
            let v = g.value_node(e.value);
            neighbors[e.tuple].push((v, rel[e.relation]));
            neighbors[v].push((e.tuple, rel[e.relation]));
        }
        Ok(Self { neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }
}

struct LayerCache {
    input: Matrix,
    /// pre-normalization `h + mean message`
    summed: Matrix,
    norms: Vec<f64>,
}

fn layer_forward(adj: &Adjacency, w: &Matrix, rel: &Matrix, h: &Matrix) -> (Matrix, LayerCache) {
    let n = adj.node_count();
    let dim = h.cols();
    let mut transformed = Matrix::zeros(n, dim);
    for j in 0..n {
        w.mul_vec_into(h.row(j), transformed.row_mut(j));
    }
    let mut rel_t = Matrix::zeros(rel.rows(), dim);
    for a in 0..rel.rows() {
        w.mul_vec_into(rel.row(a), rel_t.row_mut(a));
    }
    let mut summed = h.clone();
    for (i, nbrs) in adj.neighbors.iter().enumerate() {
        if nbrs.is_empty() {
            continue;
        }
        let inv = 1.0 / nbrs.len() as f64;
        let out = summed.row_mut(i);
        for &(j, a) in nbrs {
            for ((o, x), r) in out.iter_mut().zip(transformed.row(j)).zip(rel_t.row(a)) {
                *o += inv * (x + r);
            }
        }
    }
    let mut out = summed.clone();
    let norms = (0..n).map(|i| linalg::normalize(out.row_mut(i))).collect();
    (
        out,
        LayerCache {
            input: h.clone(),
            summed,
            norms,
        },
    )
}

fn forward_cached(adj: &Adjacency, params: &GnnParams, h0: &Matrix) -> (Matrix, Vec<LayerCache>) {
    let mut h = h0.clone();
    let mut caches = Vec::with_capacity(params.layers());
    for w in &params.weights {
        let (next, cache) = layer_forward(adj, w, &params.relation_vectors, &h);
        caches.push(cache);
        h = next;
    }
    (h, caches)
}

/// Runs all layers over graph `g` starting from `h0`.
pub fn forward(g: &MultiRelGraph, params: &GnnParams, h0: &NodeEmbeddings) -> Result<NodeEmbeddings> {
    if h0.cols() != params.dim {
        return Err(Error::DimensionMismatch {
            left: params.dim,
            right: h0.cols(),
        });
    }
    let adj = Adjacency::new(g, params)?;
    Ok(forward_cached(&adj, params, h0).0)
}

fn backward(adj: &Adjacency, params: &GnnParams, caches: &[LayerCache], d_out: Matrix) -> GnnGrads {
    let mut grads = params.zeros_like();
    let dim = params.dim;
    let n = adj.node_count();
    let mut d_h = d_out;
    for (l, cache) in caches.iter().enumerate().rev() {
        let w = &params.weights[l];
        // through normalize: dx = (dy - y (y.dy)) / |x|
        let mut d_x = Matrix::zeros(n, dim);
        for i in 0..n {
            let norm = cache.norms[i];
            if norm == 0.0 {
                continue;
            }
            let x = cache.summed.row(i);
            let dy = d_h.row(i);
            let y_dot: f64 = x.iter().zip(dy).map(|(a, b)| a * b).sum::<f64>() / norm;
            for ((o, &xv), &g) in d_x.row_mut(i).iter_mut().zip(x).zip(dy) {
                *o = (g - xv / norm * y_dot) / norm;
            }
        }
        // residual path
        let mut d_in = d_x.clone();
        let mut d_transformed = Matrix::zeros(n, dim);
        let mut d_rel_t = Matrix::zeros(params.relation_vectors.rows(), dim);
        for (i, nbrs) in adj.neighbors.iter().enumerate() {
            if nbrs.is_empty() {
                continue;
            }
            let inv = 1.0 / nbrs.len() as f64;
            let g = d_x.row(i).to_vec();
            for &(j, a) in nbrs {
                for (o, v) in d_transformed.row_mut(j).iter_mut().zip(&g) {
                    *o += inv * v;
                }
                for (o, v) in d_rel_t.row_mut(a).iter_mut().zip(&g) {
                    *o += inv * v;
                }
            }
        }
        for j in 0..n {
            let g = d_transformed.row(j);
            if g.iter().all(|v| *v == 0.0) {
                continue;
            }
            grads.weights[l].add_outer(g, cache.input.row(j), 1.0);
            w.mul_transposed_acc(g, d_in.row_mut(j));
        }
        for a in 0..d_rel_t.rows() {
            let g = d_rel_t.row(a);
            grads.weights[l].add_outer(g, params.relation_vectors.row(a), 1.0);
            w.mul_transposed_acc(g, grads.relation_vectors.row_mut(a));
        }
        d_h = d_in;
    }
    grads
}

/// Negatives grouped by source positive, at most `cap` each, in list order.
fn grouped_negatives(positives: &PositiveLabels, negatives: &NegativeLabels, cap: usize) -> Vec<Vec<(usize, usize)>> {
    let mut groups = vec![Vec::new(); positives.len()];
    for n in &negatives.0 {
        if let Some(g) = groups.get_mut(n.source) {
            if g.len() < cap {
                g.push((n.left, n.right));
            }
        }
    }
    groups
}

fn check_ids(rows: usize, idx: usize) -> Result<()> {
    if idx >= rows {
        return Err(Error::UnknownTuple { index: idx, len: rows });
    }
    Ok(())
}

/// Loss value plus gradients w.r.t. the left/right tuple embeddings and the
/// number of hinge terms. The hinge derivative at exactly 0 is taken as 0.
pub fn margin_loss_grad(
    left: &Matrix,
    right: &Matrix,
    positives: &PositiveLabels,
    negatives: &NegativeLabels,
    cfg: &MarginLossConfig,
) -> Result<(f64, Matrix, Matrix, usize)> {
    for p in &positives.0 {
        check_ids(left.rows(), p.left)?;
        check_ids(right.rows(), p.right)?;
    }
    for n in &negatives.0 {
        check_ids(left.rows(), n.left)?;
        check_ids(right.rows(), n.right)?;
    }
    let mut d_left = Matrix::zeros(left.rows(), left.cols());
    let mut d_right = Matrix::zeros(right.rows(), right.cols());
    let groups = grouped_negatives(positives, negatives, cfg.negatives_per_positive);
    let mut loss = 0.0;
    let mut terms = 0;
    for (p, group) in positives.0.iter().zip(&groups) {
        let d_pos = 1.0 - linalg::cosine(left.row(p.left), right.row(p.right));
        for &(l, r) in group {
            terms += 1;
            let d_neg = 1.0 - linalg::cosine(left.row(l), right.row(r));
            let hinge = d_pos + cfg.gamma - d_neg;
            if hinge <= 0.0 {
                continue;
            }
            loss += hinge;
            // d(d_pos)/dcos = -1, d(-d_neg)/dcos = +1
            let mut gl = vec![0.0; left.cols()];
            let mut gr = vec![0.0; right.cols()];
            linalg::cosine_backward(left.row(p.left), right.row(p.right), -1.0, &mut gl, &mut gr);
            add_into(d_left.row_mut(p.left), &gl);
            add_into(d_right.row_mut(p.right), &gr);
            let mut gl = vec![0.0; left.cols()];
            let mut gr = vec![0.0; right.cols()];
            linalg::cosine_backward(left.row(l), right.row(r), 1.0, &mut gl, &mut gr);
            add_into(d_left.row_mut(l), &gl);
            add_into(d_right.row_mut(r), &gr);
        }
    }
    Ok((loss, d_left, d_right, terms))
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Margin loss over tuple embeddings (one row per tuple).
pub fn margin_loss(
    left: &Matrix,
    right: &Matrix,
    positives: &PositiveLabels,
    negatives: &NegativeLabels,
    cfg: &MarginLossConfig,
) -> Result<f64> {
    margin_loss_grad(left, right, positives, negatives, cfg).map(|r| r.0)
}

fn tuple_rows(h: &Matrix, tuples: usize) -> Matrix {
    Matrix::from_vec(tuples, h.cols(), h.as_slice()[..tuples * h.cols()].to_vec())
}

/// The training objective as a function of the parameters, with node inputs
/// held fixed.
pub struct GraphObjective<'a> {
    pub left: &'a MultiRelGraph,
    pub right: &'a MultiRelGraph,
    pub left_inputs: &'a NodeEmbeddings,
    pub right_inputs: &'a NodeEmbeddings,
    pub positives: &'a PositiveLabels,
    pub negatives: &'a NegativeLabels,
    pub margin: MarginLossConfig,
}

pub struct Evaluation {
    pub loss: f64,
    pub terms: usize,
    pub left_tuples: Matrix,
    pub right_tuples: Matrix,
    pub grads: Option<GnnGrads>,
}

impl GraphObjective<'_> {
    pub fn evaluate(&self, params: &GnnParams, with_grads: bool) -> Result<Evaluation> {
        let adj_l = Adjacency::new(self.left, params)?;
        let adj_r = Adjacency::new(self.right, params)?;
        let (out_l, cache_l) = forward_cached(&adj_l, params, self.left_inputs);
        let (out_r, cache_r) = forward_cached(&adj_r, params, self.right_inputs);
        let left_tuples = tuple_rows(&out_l, self.left.tuple_count());
        let right_tuples = tuple_rows(&out_r, self.right.tuple_count());
        let (loss, d_l, d_r, terms) =
            margin_loss_grad(&left_tuples, &right_tuples, self.positives, self.negatives, &self.margin)?;
        let grads = with_grads.then(|| {
            let mut full_l = Matrix::zeros(out_l.rows(), out_l.cols());
            full_l.as_mut_slice()[..d_l.as_slice().len()].copy_from_slice(d_l.as_slice());
            let mut full_r = Matrix::zeros(out_r.rows(), out_r.cols());
            full_r.as_mut_slice()[..d_r.as_slice().len()].copy_from_slice(d_r.as_slice());
            let mut g = backward(&adj_l, params, &cache_l, full_l);
            g.add(&backward(&adj_r, params, &cache_r, full_r));
            g
        });
        Ok(Evaluation {
            loss,
            terms,
            left_tuples,
            right_tuples,
            grads,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphModel {
    pub params: GnnParams,
    /// Final tuple embeddings, one row per tuple.
    pub left: Matrix,
    pub right: Matrix,
    /// `trace[e]` is the loss before update `e`; the last entry is the final
    /// loss.
    pub trace: Vec<f64>,
}

/// Gradient descent on the margin loss. The step uses the gradient of the
/// mean hinge term so the learning rate does not depend on label count; the
/// trace records the summed loss.
pub fn train(
    left: &MultiRelGraph,
    right: &MultiRelGraph,
    positives: &PositiveLabels,
    negatives: &NegativeLabels,
    cfg: &GraphTrainConfig,
) -> Result<GraphModel> {
    cfg.validate()?;
    if positives.is_empty() {
        return Err(Error::NoLabels);
    }
    let encoder = HashedNgramEncoder::with_dimension(cfg.dim, cfg.seed)?;
    let h_left = init_embeddings(left, &encoder);
    let h_right = init_embeddings(right, &encoder);
    let params = GnnParams::init(cfg.dim, cfg.layers, shared_relations(&[left, right]), cfg.seed);
    train_from(left, right, &h_left, &h_right, params, positives, negatives, &cfg.margin)
}

#[allow(clippy::too_many_arguments)]
pub fn train_from(
    left: &MultiRelGraph,
    right: &MultiRelGraph,
    left_inputs: &NodeEmbeddings,
    right_inputs: &NodeEmbeddings,
    mut params: GnnParams,
    positives: &PositiveLabels,
    negatives: &NegativeLabels,
    margin: &MarginLossConfig,
) -> Result<GraphModel> {
    let objective = GraphObjective {
        left,
        right,
        left_inputs,
        right_inputs,
        positives,
        negatives,
        margin: *margin,
    };
    let mut trace = Vec::with_capacity(margin.epochs + 1);
    let mut stepper = Stepper::new(margin.optimizer, margin.learning_rate, params.parameter_count());
    let mut epoch = 0;
    loop {
        let last = epoch == margin.epochs;
        let eval = objective.evaluate(&params, !last)?;
        if !eval.loss.is_finite() {
            return Err(Error::NonFiniteLoss { stage: "train-graph", epoch });
        }
        trace.push(eval.loss);
        match eval.grads {
            Some(grads) if !last => {
                stepper.step(params.flat_mut(), grads.flat(), eval.terms);
                if !params.is_finite() {
                    return Err(Error::NonFiniteLoss { stage: "train-graph", epoch });
                }
            }
            _ => {
                return Ok(GraphModel {
                    params,
                    left: eval.left_tuples,
                    right: eval.right_tuples,
                    trace,
                })
            }
        }
        epoch += 1;
    }
}

/// Relative error `|a - n| / max(|a|, |n|, floor)`; the floor keeps gradients
/// that are zero up to round-off from dominating.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-6;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    pub seed: u64,
    pub dim: usize,
    pub layers: usize,
    pub gamma: f64,
    pub step: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            seed: 3,
            dim: 4,
            layers: 2,
            gamma: 1.0,
            step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub parameters: usize,
    pub loss: f64,
}

/// Central differences of `f` around every parameter of `params`.
pub fn numeric_gradient(params: &GnnParams, step: f64, f: impl Fn(&GnnParams) -> f64) -> GnnGrads {
    let mut grads = params.zeros_like();
    let mut p = params.clone();
    for l in 0..p.weights.len() {
        for k in 0..p.weights[l].as_slice().len() {
            let orig = p.weights[l].as_slice()[k];
            p.weights[l].as_mut_slice()[k] = orig + step;
            let plus = f(&p);
            p.weights[l].as_mut_slice()[k] = orig - step;
            let minus = f(&p);
            p.weights[l].as_mut_slice()[k] = orig;
            grads.weights[l].as_mut_slice()[k] = (plus - minus) / (2.0 * step);
        }
    }
    for k in 0..p.relation_vectors.as_slice().len() {
        let orig = p.relation_vectors.as_slice()[k];
        p.relation_vectors.as_mut_slice()[k] = orig + step;
        let plus = f(&p);
        p.relation_vectors.as_mut_slice()[k] = orig - step;
        let minus = f(&p);
        p.relation_vectors.as_mut_slice()[k] = orig;
        grads.relation_vectors.as_mut_slice()[k] = (plus - minus) / (2.0 * step);
    }
    grads
}

pub fn max_relative_error(analytic: &GnnGrads, numeric: &GnnGrads) -> (f64, usize) {
    let pairs = analytic
        .weights
        .iter()
        .zip(&numeric.weights)
        .flat_map(|(a, n)| a.as_slice().iter().zip(n.as_slice()))
        .chain(
            analytic
                .relation_vectors
                .as_slice()
                .iter()
                .zip(numeric.relation_vectors.as_slice()),
        );
    let mut worst = 0.0f64;
    let mut count = 0;
    for (a, n) in pairs {
        worst = worst.max(relative_error(*a, *n));
        count += 1;
    }
    (worst, count)
}

/// Small random instance: two graphs with shared values, random inputs and
/// parameters, two positives with three negatives each.
pub fn toy_problem(cfg: &GradCheckConfig) -> (MultiRelGraph, MultiRelGraph, Matrix, Matrix, GnnParams, PositiveLabels, NegativeLabels) {
    use crate::dataset::{Dataset, Tuple};
    use crate::graph::mrgc;
    use crate::labels::{NegativeLabel, PositiveLabel};

    let attrs = vec![String::from("name"), String::from("brand")];
    let left = Dataset::new(
        "L",
        attrs.clone(),
        vec![
            Tuple::from_cells("0", &["alpha", "acme"]),
            Tuple::from_cells("1", &["beta", "acme"]),
            Tuple::from_cells("2", &["gamma", ""]),
        ],
    )
    .expect("static toy dataset");
    let right = Dataset::new(
        "R",
        attrs,
        vec![
            Tuple::from_cells("0", &["alpha", "acme"]),
            Tuple::from_cells("1", &["", "globex"]),
            Tuple::from_cells("2", &["gamma", "globex"]),
        ],
    )
    .expect("static toy dataset");
    let gl = mrgc(&left);
    let gr = mrgc(&right);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random = |rows: usize| {
        let mut m = Matrix::zeros(rows, cfg.dim);
        for x in m.as_mut_slice() {
            *x = rng.random_range(-1.0..1.0);
        }
        m
    };
    let hl = random(gl.node_count());
    let hr = random(gr.node_count());
    let mut params = GnnParams::init(cfg.dim, cfg.layers, shared_relations(&[&gl, &gr]), cfg.seed);
    for w in &mut params.weights {
        for x in w.as_mut_slice() {
            *x += rng.random_range(-0.5..0.5);
        }
    }
    for x in params.relation_vectors.as_mut_slice() {
        *x = rng.random_range(-0.5..0.5);
    }
    let positives = PositiveLabels(vec![
        PositiveLabel { left: 0, right: 0, score: 1.0 },
        PositiveLabel { left: 2, right: 2, score: 1.0 },
    ]);
    let negatives = NegativeLabels(vec![
        NegativeLabel { left: 1, right: 0, source: 0 },
        NegativeLabel { left: 2, right: 0, source: 0 },
        NegativeLabel { left: 0, right: 1, source: 0 },
        NegativeLabel { left: 0, right: 2, source: 1 },
        NegativeLabel { left: 1, right: 2, source: 1 },
        NegativeLabel { left: 2, right: 1, source: 1 },
    ]);
    (gl, gr, hl, hr, params, positives, negatives)
}

/// Analytic vs central-difference gradients of the margin loss on
/// [`toy_problem`].
pub fn gradient_check(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let (gl, gr, hl, hr, params, positives, negatives) = toy_problem(cfg);
    let objective = GraphObjective {
        left: &gl,
        right: &gr,
        left_inputs: &hl,
        right_inputs: &hr,
        positives: &positives,
        negatives: &negatives,
        margin: MarginLossConfig {
            gamma: cfg.gamma,
            negatives_per_positive: 20,
            ..MarginLossConfig::default()
        },
    };
    let eval = objective.evaluate(&params, true)?;
    let analytic = eval.grads.expect("requested gradients");
    let numeric = numeric_gradient(&params, cfg.step, |p| {
        objective.evaluate(p, false).map(|e| e.loss).unwrap_or(f64::NAN)
    });
    let (max_relative_error, parameters) = max_relative_error(&analytic, &numeric);
    Ok(GradCheckReport {
        max_relative_error,
        parameters,
        loss: eval.loss,
    })
}
