//! Text formats for every pipeline artifact. Artifacts start with a
//! `# config_hash=<hex>` line; readers skip any leading `#` lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use erpipe_core::collab::{CsflParams, LossParts, Prediction};
use erpipe_core::dataset::Dataset;
use erpipe_core::gnn::GnnParams;
use erpipe_core::graph::MultiRelGraph;
use erpipe_core::labels::{NegativeLabels, PositiveLabel, PositiveLabels};
use erpipe_core::linalg::Matrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown {side} id {id:?}")]
    UnknownId { side: &'static str, id: String },
    #[error("id {0:?} contains a tab or newline")]
    BadId(String),
    #[error(transparent)]
    Core(#[from] erpipe_core::Error),
}

type Result<T, E = FormatError> = std::result::Result<T, E>;

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

const HASH_PREFIX: &str = "# config_hash=";

pub fn hash_line(out: &mut String, hash: &str) {
    out.push_str(HASH_PREFIX);
    out.push_str(hash);
    out.push('\n');
}

/// The config hash recorded in a leading comment line, if any.
pub fn config_hash(text: &str) -> Option<&str> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(HASH_PREFIX))
        .map(str::trim)
}

/// Non-comment lines with 1-based line numbers. Only leading `#` lines are
/// comments; blank lines are skipped everywhere.
fn body_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut header = true;
    text.lines().enumerate().filter_map(move |(i, l)| {
        let l = l.strip_suffix('\r').unwrap_or(l);
        if header && l.starts_with('#') {
            return None;
        }
        header = false;
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number {s:?}")));
    }
    Ok(v)
}

fn check_id(id: &str) -> Result<()> {
    if id.contains(['\t', '\n', '\r']) {
        return Err(FormatError::BadId(id.to_string()));
    }
    Ok(())
}

/// Tuple id to position lookup for one dataset.
pub struct IdIndex<'a> {
    dataset: &'a Dataset,
    side: &'static str,
    map: HashMap<&'a str, usize>,
}

impl<'a> IdIndex<'a> {
    pub fn new(dataset: &'a Dataset, side: &'static str) -> Self {
        let map = dataset.tuples().iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        Self { dataset, side, map }
    }

    pub fn index(&self, id: &str) -> Result<usize> {
        self.map.get(id).copied().ok_or_else(|| FormatError::UnknownId {
            side: self.side,
            id: id.to_string(),
        })
    }

    pub fn id(&self, index: usize) -> &'a str {
        &self.dataset.tuples()[index].id
    }
}

// ---- embeddings ------------------------------------------------------------

/// `<count> <dim>` header, then `<id> <f1> ... <fdim>` per line.
pub fn write_embeddings<'a>(
    hash: Option<&str>,
    rows: impl ExactSizeIterator<Item = (&'a str, &'a [f64])>,
    dim: usize,
) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    writeln!(out, "{} {dim}", rows.len()).unwrap();
    for (id, v) in rows {
        check_id(id)?;
        if id.is_empty() || id.contains(' ') {
            return Err(FormatError::BadId(id.to_string()));
        }
        out.push_str(id);
        for x in v {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn read_embeddings(text: &str) -> Result<(usize, Vec<(String, Vec<f64>)>)> {
    let mut lines = body_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing \"<count> <dimension>\" header"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [count, dim] = parts[..] else {
        return Err(parse_err(hl, "header must be \"<count> <dimension>\""));
    };
    let count: usize = count.parse().map_err(|_| parse_err(hl, "bad count"))?;
    let dim: usize = dim.parse().map_err(|_| parse_err(hl, "bad dimension"))?;
    let mut rows = Vec::with_capacity(count);
    let mut seen = HashMap::new();
    for (ln, line) in lines {
        let mut tokens = line.split_whitespace();
        let id = tokens.next().unwrap().to_string();
        let v = tokens.map(|t| parse_f64(ln, t)).collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} values, found {}", v.len())));
        }
        if seen.insert(id.clone(), ln).is_some() {
            return Err(parse_err(ln, format!("duplicate id {id:?}")));
        }
        rows.push((id, v));
    }
    if rows.len() != count {
        return Err(parse_err(hl, format!("header declares {count} rows, found {}", rows.len())));
    }
    Ok((dim, rows))
}

// ---- pair lists ------------------------------------------------------------

/// `left_id<TAB>right_id` per pair.
pub fn write_pairs(hash: Option<&str>, pairs: &[(usize, usize)], left: &IdIndex, right: &IdIndex) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    for &(l, r) in pairs {
        let (a, b) = (left.id(l), right.id(r));
        check_id(a)?;
        check_id(b)?;
        writeln!(out, "{a}\t{b}").unwrap();
    }
    Ok(out)
}

fn split_fields(ln: usize, line: &str, n: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != n {
        return Err(parse_err(ln, format!("expected {n} tab-separated fields, found {}", fields.len())));
    }
    Ok(fields)
}

pub fn read_pairs(text: &str, left: &IdIndex, right: &IdIndex) -> Result<Vec<(usize, usize)>> {
    body_lines(text)
        .map(|(ln, line)| {
            let f = split_fields(ln, line, 2)?;
            Ok((left.index(f[0])?, right.index(f[1])?))
        })
        .collect()
}

// ---- labels ----------------------------------------------------------------

/// Positives as `...<TAB>1`, then negatives as `...<TAB>0`.
pub fn write_labels(
    hash: Option<&str>,
    positives: &PositiveLabels,
    negatives: &NegativeLabels,
    left: &IdIndex,
    right: &IdIndex,
) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    for (pairs, tag) in [(positives.pairs().collect::<Vec<_>>(), 1), (negatives.pairs().collect(), 0)] {
        for (l, r) in pairs {
            let (a, b) = (left.id(l), right.id(r));
            check_id(a)?;
            check_id(b)?;
            writeln!(out, "{a}\t{b}\t{tag}").unwrap();
        }
    }
    Ok(out)
}

/// Reads a label file. Positive scores are not stored and come back as 1;
/// each negative is attributed to a positive sharing one of its tuples.
pub fn read_labels(text: &str, left: &IdIndex, right: &IdIndex) -> Result<(PositiveLabels, NegativeLabels)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (ln, line) in body_lines(text) {
        let f = split_fields(ln, line, 3)?;
        let pair = (left.index(f[0])?, right.index(f[1])?);
        match f[2].trim() {
            "1" => pos.push(PositiveLabel {
                left: pair.0,
                right: pair.1,
                score: 1.0,
            }),
            "0" => neg.push(pair),
            other => return Err(parse_err(ln, format!("label must be 0 or 1, found {other:?}"))),
        }
    }
    let positives = PositiveLabels(pos);
    let negatives = NegativeLabels::attribute(&neg, &positives);
    Ok((positives, negatives))
}

// ---- predictions -----------------------------------------------------------

pub fn write_predictions(hash: Option<&str>, preds: &[Prediction], left: &IdIndex, right: &IdIndex) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    for p in preds {
        let (a, b) = (left.id(p.left), right.id(p.right));
        check_id(a)?;
        check_id(b)?;
        writeln!(out, "{a}\t{b}\t{}\t{}", p.probability, u8::from(p.matched)).unwrap();
    }
    Ok(out)
}

pub fn read_predictions(text: &str, left: &IdIndex, right: &IdIndex) -> Result<Vec<Prediction>> {
    body_lines(text)
        .map(|(ln, line)| {
            let f = split_fields(ln, line, 4)?;
            let matched = match f[3].trim() {
                "1" => true,
                "0" => false,
                other => return Err(parse_err(ln, format!("label must be 0 or 1, found {other:?}"))),
            };
            Ok(Prediction {
                left: left.index(f[0])?,
                right: right.index(f[1])?,
                probability: parse_f64(ln, f[2].trim())?,
                matched,
            })
        })
        .collect()
}

// ---- graph export ----------------------------------------------------------

/// `tuple_node<TAB>attribute<TAB>value_node` per edge.
pub fn write_graph_triples(hash: Option<&str>, g: &MultiRelGraph) -> String {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    for e in g.edges() {
        writeln!(out, "{}\t{}\t{}", e.tuple, g.relations()[e.relation], g.value_node(e.value)).unwrap();
    }
    out
}

/// `node<TAB>kind<TAB>label`: tuple nodes carry the tuple id, value nodes the
/// normalized value.
pub fn write_graph_nodes(hash: Option<&str>, g: &MultiRelGraph, dataset: &Dataset) -> String {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    for (i, t) in dataset.tuples().iter().enumerate() {
        writeln!(out, "{i}\ttuple\t{}", t.id).unwrap();
    }
    for (v, text) in g.values().iter().enumerate() {
        writeln!(out, "{}\tvalue\t{text}", g.value_node(v)).unwrap();
    }
    out
}

// ---- loss traces -----------------------------------------------------------

pub fn write_graph_loss(hash: Option<&str>, trace: &[f64]) -> String {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    out.push_str("epoch,loss\n");
    for (e, l) in trace.iter().enumerate() {
        writeln!(out, "{e},{l}").unwrap();
    }
    out
}

pub fn write_collab_loss(hash: Option<&str>, trace: &[LossParts]) -> String {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    out.push_str("epoch,loss,l1,l2\n");
    for (e, l) in trace.iter().enumerate() {
        writeln!(out, "{e},{},{},{}", l.total, l.l1, l.l2).unwrap();
    }
    out
}

/// First column after `epoch` of a loss CSV.
pub fn read_loss(text: &str) -> Result<Vec<f64>> {
    body_lines(text)
        .skip(1)
        .map(|(ln, line)| {
            let v = line.split(',').nth(1).ok_or_else(|| parse_err(ln, "missing loss column"))?;
            parse_f64(ln, v)
        })
        .collect()
}

// ---- model files -----------------------------------------------------------

struct Tokens<'a> {
    lines: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(body_lines(text));
        Self {
            lines: it.peekable(),
            last: 0,
        }
    }

    fn line(&mut self) -> Result<(usize, &'a str)> {
        let (ln, l) = self.lines.next().ok_or_else(|| parse_err(self.last + 1, "unexpected end of file"))?;
        self.last = ln;
        Ok((ln, l))
    }

    /// A line `<key> <rest>`; returns `rest`.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let (ln, l) = self.line()?;
        let rest = l.strip_prefix(key).filter(|r| r.is_empty() || r.starts_with(' '));
        rest.map(|r| r.strip_prefix(' ').unwrap_or(r))
            .ok_or_else(|| parse_err(ln, format!("expected {key:?}")))
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let ln = self.last + 1;
        let v = self.keyed(key)?;
        v.trim().parse().map_err(|_| parse_err(ln, format!("bad {key}")))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let (ln, l) = self.line()?;
        let v = l.split_whitespace().map(|t| parse_f64(ln, t)).collect::<Result<Vec<_>>>()?;
        if v.len() != n {
            return Err(parse_err(ln, format!("expected {n} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.floats(cols)?);
        }
        Ok(Matrix::from_vec(rows, cols, data))
    }

    fn end(&mut self) -> Result<()> {
        match self.lines.next() {
            None => Ok(()),
            Some((ln, _)) => Err(parse_err(ln, "trailing content")),
        }
    }
}

fn push_matrix(out: &mut String, m: &Matrix) {
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(f64::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

const GRAPH_MAGIC: &str = "erpipe-graph-model 1";
const COLLAB_MAGIC: &str = "erpipe-collab-model 1";

/// Graph checkpoint: parameters plus final tuple embeddings of both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheckpoint {
    pub params: GnnParams,
    pub left: Matrix,
    pub right: Matrix,
}

pub fn write_graph_checkpoint(hash: Option<&str>, ck: &GraphCheckpoint) -> String {
    let p = &ck.params;
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    writeln!(out, "{GRAPH_MAGIC}").unwrap();
    writeln!(out, "dim {}", p.dim).unwrap();
    writeln!(out, "layers {}", p.layers()).unwrap();
    writeln!(out, "relations {}", p.relations.len()).unwrap();
    for r in &p.relations {
        writeln!(out, "relation {r}").unwrap();
    }
    for w in &p.weights {
        out.push_str("weight\n");
        push_matrix(&mut out, w);
    }
    out.push_str("relation_vectors\n");
    push_matrix(&mut out, &p.relation_vectors);
    writeln!(out, "left {}", ck.left.rows()).unwrap();
    push_matrix(&mut out, &ck.left);
    writeln!(out, "right {}", ck.right.rows()).unwrap();
    push_matrix(&mut out, &ck.right);
    out
}

pub fn read_graph_checkpoint(text: &str) -> Result<GraphCheckpoint> {
    let mut t = Tokens::new(text);
    t.keyed(GRAPH_MAGIC)?;
    let dim = t.keyed_usize("dim")?;
    let layers = t.keyed_usize("layers")?;
    let nrel = t.keyed_usize("relations")?;
    let relations = (0..nrel).map(|_| t.keyed("relation").map(str::to_string)).collect::<Result<Vec<_>>>()?;
    let mut weights = Vec::with_capacity(layers);
    for _ in 0..layers {
        t.keyed("weight")?;
        weights.push(t.matrix(dim, dim)?);
    }
    t.keyed("relation_vectors")?;
    let relation_vectors = t.matrix(nrel, dim)?;
    let nl = t.keyed_usize("left")?;
    let left = t.matrix(nl, dim)?;
    let nr = t.keyed_usize("right")?;
    let right = t.matrix(nr, dim)?;
    t.end()?;
    Ok(GraphCheckpoint {
        params: GnnParams {
            dim,
            weights,
            relations,
            relation_vectors,
        },
        left,
        right,
    })
}

pub fn write_collab_model(hash: Option<&str>, p: &CsflParams) -> String {
    let mut out = String::new();
    if let Some(h) = hash {
        hash_line(&mut out, h);
    }
    writeln!(out, "{COLLAB_MAGIC}").unwrap();
    writeln!(out, "sentence_dim {}", p.sentence_dim()).unwrap();
    writeln!(out, "graph_dim {}", p.graph_dim()).unwrap();
    out.push_str("projection\n");
    push_matrix(&mut out, &p.projection);
    out.push_str("classifier\n");
    push_matrix(&mut out, &p.classifier);
    writeln!(out, "bias {} {}", p.bias[0], p.bias[1]).unwrap();
    out
}

pub fn read_collab_model(text: &str) -> Result<CsflParams> {
    let mut t = Tokens::new(text);
    t.keyed(COLLAB_MAGIC)?;
    let n = t.keyed_usize("sentence_dim")?;
    let c = t.keyed_usize("graph_dim")?;
    t.keyed("projection")?;
    let projection = t.matrix(n, n)?;
    t.keyed("classifier")?;
    let classifier = t.matrix(2, 2 * n + 2 * c)?;
    let ln = t.last + 1;
    let b = t.keyed("bias")?;
    let b = b.split_whitespace().map(|x| parse_f64(ln, x)).collect::<Result<Vec<_>>>()?;
    let [b0, b1] = b[..] else {
        return Err(parse_err(ln, "bias needs two values"));
    };
    t.end()?;
    Ok(CsflParams {
        projection,
        classifier,
        bias: [b0, b1],
    })
}
