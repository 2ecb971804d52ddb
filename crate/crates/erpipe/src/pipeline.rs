use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context};
use erpipe_core::anomaly::{detect_anomalies, AnomalyKind, AnomalyRecord, AttributeMapping};
use erpipe_core::blocking::block_neighbors;
use erpipe_core::collab::{labeled_pairs, predict, train_collab, PairInputs};
use erpipe_core::dataset::{serialize_tuple, Dataset};
use erpipe_core::embedding::{EmbeddingVector, HashedNgramEncoder, LookupEncoder, ProviderSpec};
use erpipe_core::eval::{score_labels, score_predictions, split_candidates, GroundTruth, LabelQualityReport, MetricsReport};
use erpipe_core::gnn::train;
use erpipe_core::graph::{graph_stats, mrgc, reference_graph, GraphStats, ReferenceStyle};
use erpipe_core::labels::{rplg_neighbors, snlg};
use erpipe_core::linalg::Matrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{LoadedConfig, PipelineConfig};
use crate::csv::load_csv;
use crate::formats::{self, GraphCheckpoint, IdIndex};
use crate::similarity::neighbor_lists;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Embed,
    Block,
    Label,
    Graph,
    TrainGraph,
    TrainCollab,
    Predict,
    Eval,
    Anomaly,
}

pub const STAGES: [Stage; 10] = [
    Stage::Ingest,
    Stage::Embed,
    Stage::Block,
    Stage::Label,
    Stage::Graph,
    Stage::TrainGraph,
    Stage::TrainCollab,
    Stage::Predict,
    Stage::Eval,
    Stage::Anomaly,
];

pub const INGEST: &str = "ingest.json";
pub const EMBED_LEFT: &str = "embeddings_left.txt";
pub const EMBED_RIGHT: &str = "embeddings_right.txt";
pub const CANDIDATES: &str = "candidates.tsv";
pub const LABELS: &str = "labels.tsv";
pub const GRAPH_STATS: &str = "graph_stats.json";
pub const GRAPH_LEFT_TRIPLES: &str = "graph_left_triples.tsv";
pub const GRAPH_LEFT_NODES: &str = "graph_left_nodes.tsv";
pub const GRAPH_RIGHT_TRIPLES: &str = "graph_right_triples.tsv";
pub const GRAPH_RIGHT_NODES: &str = "graph_right_nodes.tsv";
pub const GRAPH_MODEL: &str = "graph_model.txt";
pub const GRAPH_LOSS: &str = "graph_loss.csv";
pub const COLLAB_MODEL: &str = "collab_model.txt";
pub const COLLAB_LOSS: &str = "collab_loss.csv";
pub const PREDICTIONS: &str = "predictions.tsv";
pub const EVAL: &str = "eval.json";
pub const ANOMALIES: &str = "anomalies.jsonl";

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Embed => "embed",
            Stage::Block => "block",
            Stage::Label => "label",
            Stage::Graph => "graph",
            Stage::TrainGraph => "train-graph",
            Stage::TrainCollab => "train-collab",
            Stage::Predict => "predict",
            Stage::Eval => "eval",
            Stage::Anomaly => "anomaly",
        }
    }

    /// Files written by the stage; the first is its primary artifact.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &[INGEST],
            Stage::Embed => &[EMBED_LEFT, EMBED_RIGHT],
            Stage::Block => &[CANDIDATES],
            Stage::Label => &[LABELS],
            Stage::Graph => &[
                GRAPH_STATS,
                GRAPH_LEFT_TRIPLES,
                GRAPH_LEFT_NODES,
                GRAPH_RIGHT_TRIPLES,
                GRAPH_RIGHT_NODES,
            ],
            Stage::TrainGraph => &[GRAPH_MODEL, GRAPH_LOSS],
            Stage::TrainCollab => &[COLLAB_MODEL, COLLAB_LOSS],
            Stage::Predict => &[PREDICTIONS],
            Stage::Eval => &[EVAL],
            Stage::Anomaly => &[ANOMALIES],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("stage {stage} failed: {cause:#}")]
pub struct StageError {
    pub stage: Stage,
    pub cause: anyhow::Error,
}

#[derive(Debug)]
pub struct StageReport {
    pub stage: Stage,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    /// Human-readable output meant for stdout.
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub path: String,
    pub sha256: String,
    pub attributes: Vec<String>,
    pub tuples: usize,
    pub present_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub config_hash: String,
    pub left: DatasetSummary,
    pub right: DatasetSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSideStats {
    pub mrgc: GraphStats,
    pub embdi: GraphStats,
    pub grapher: GraphStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStatsReport {
    pub config_hash: String,
    pub left: GraphSideStats,
    pub right: GraphSideStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingReport {
    pub candidates: usize,
    pub truth: usize,
    pub truth_in_candidates: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_hash: String,
    /// Predictions scored on the test split of the candidates.
    pub test: MetricsReport,
    pub all_candidates: MetricsReport,
    pub blocking: BlockingReport,
    pub labels: LabelQualityReport,
    pub split: SplitSizes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyLine {
    pub config_hash: String,
    #[serde(flatten)]
    pub record: AnomalyRecord,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Pipeline {
    pub loaded: LoadedConfig,
    pub out: PathBuf,
    pub hash: String,
    /// Accept artifacts produced under a different config.
    pub force: bool,
}

impl Pipeline {
    pub fn new(loaded: LoadedConfig, out: Option<PathBuf>, force: bool) -> Self {
        let out = out.unwrap_or_else(|| loaded.resolve(&loaded.config.output_dir));
        let hash = loaded.config.hash();
        Self {
            loaded,
            out,
            hash,
            force,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.loaded.config
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn run_all(&self) -> Result<Vec<StageReport>, StageError> {
        STAGES.iter().map(|&s| self.run_stage(s)).collect()
    }

    pub fn run_stage(&self, stage: Stage) -> Result<StageReport, StageError> {
        let result = match stage {
            Stage::Ingest => self.ingest(),
            Stage::Embed => self.embed(),
            Stage::Block => self.block(),
            Stage::Label => self.label(),
            Stage::Graph => self.graph(),
            Stage::TrainGraph => self.train_graph(),
            Stage::TrainCollab => self.train_collab(),
            Stage::Predict => self.predict(),
            Stage::Eval => self.eval(),
            Stage::Anomaly => self.anomaly(),
        };
        result.map_err(|cause| StageError { stage, cause })
    }

    /// Writes every file as `<name>.partial`, then renames them all. A failed
    /// write leaves the `.partial` files behind.
    fn commit(&self, stage: Stage, files: Vec<(&str, String)>, summary: String) -> anyhow::Result<StageReport> {
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))?;
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in &files {
            let partial = self.out.join(format!("{name}.partial"));
            fs::write(&partial, body).with_context(|| format!("cannot write {}", partial.display()))?;
            written.push((partial, self.artifact(name)));
        }
        for (partial, target) in &written {
            fs::rename(partial, target).with_context(|| format!("cannot rename {}", partial.display()))?;
        }
        Ok(StageReport {
            stage,
            artifacts: written.into_iter().map(|(_, t)| t).collect(),
            summary,
            table: None,
        })
    }

    fn check_hash(&self, name: &str, found: Option<&str>) -> anyhow::Result<()> {
        match found {
            Some(h) if h == self.hash => Ok(()),
            _ if self.force => Ok(()),
            Some(h) => bail!(
                "{name} was produced under config {h}, current config is {}; rerun the producing stage or pass --force",
                self.hash
            ),
            None => bail!("{name} carries no config hash; pass --force to use it anyway"),
        }
    }

    fn read_artifact(&self, name: &str) -> anyhow::Result<String> {
        let path = self.artifact(name);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read {} (run the stage that produces it first)", path.display()))?;
        self.check_hash(name, formats::config_hash(&text))?;
        Ok(text)
    }

    fn read_json_artifact<T: for<'de> Deserialize<'de>>(&self, name: &str) -> anyhow::Result<T> {
        let path = self.artifact(name);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read {} (run the stage that produces it first)", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{name}: invalid JSON"))?;
        self.check_hash(name, value.get("config_hash").and_then(|v| v.as_str()))?;
        serde_json::from_value(value).with_context(|| format!("{name}: unexpected content"))
    }

    fn input_paths(&self) -> (PathBuf, PathBuf) {
        let c = self.config();
        (self.loaded.resolve(&c.left_path), self.loaded.resolve(&c.right_path))
    }

    fn load_inputs(&self) -> anyhow::Result<(Dataset, Dataset, [String; 2])> {
        let (lp, rp) = self.input_paths();
        let id_column = self.config().id_column.as_deref();
        let mut digests = [String::new(), String::new()];
        let mut sets = Vec::with_capacity(2);
        for (k, p) in [lp, rp].iter().enumerate() {
            let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
            digests[k] = sha256_hex(&bytes);
            sets.push(load_csv(p, id_column)?);
        }
        let right = sets.pop().unwrap();
        let left = sets.pop().unwrap();
        Ok((left, right, digests))
    }

    /// Datasets as recorded by the ingest stage; fails if the inputs changed.
    fn datasets(&self) -> anyhow::Result<(Dataset, Dataset)> {
        let report: IngestReport = self.read_json_artifact(INGEST)?;
        let (left, right, digests) = self.load_inputs()?;
        if !self.force {
            ensure!(
                report.left.sha256 == digests[0] && report.right.sha256 == digests[1],
                "input datasets changed since ingest; rerun ingest"
            );
        }
        Ok((left, right))
    }

    fn ingest(&self) -> anyhow::Result<StageReport> {
        let (lp, rp) = self.input_paths();
        let (left, right, digests) = self.load_inputs()?;
        let summary = |d: &Dataset, p: &Path, sha: &str| DatasetSummary {
            path: p.display().to_string(),
            sha256: sha.to_string(),
            attributes: d.attributes().to_vec(),
            tuples: d.len(),
            present_cells: d.present_cells(),
        };
        let report = IngestReport {
            config_hash: self.hash.clone(),
            left: summary(&left, &lp, &digests[0]),
            right: summary(&right, &rp, &digests[1]),
        };
        let text = serde_json::to_string_pretty(&report)? + "\n";
        self.commit(
            Stage::Ingest,
            vec![(INGEST, text)],
            format!("{} left tuples, {} right tuples", left.len(), right.len()),
        )
    }

    fn embed(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (le, re) = match &self.config().embedding {
            ProviderSpec::HashedNgram {
                dimension,
                ngram_sizes,
                seed,
            } => {
                let enc = HashedNgramEncoder::new(*dimension, ngram_sizes.clone(), *seed)?;
                let run = |d: &Dataset| -> Vec<EmbeddingVector> {
                    d.tuples()
                        .par_iter()
                        .map(|t| enc.embed_text(serialize_tuple(d, t).as_str()))
                        .collect()
                };
                (run(&left), run(&right))
            }
            ProviderSpec::File {
                dimension,
                left_path,
                right_path,
            } => {
                let lookup = |p: &str, d: &Dataset| -> anyhow::Result<Vec<EmbeddingVector>> {
                    let path = self.loaded.resolve(Path::new(p));
                    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                    let (dim, rows) = formats::read_embeddings(&text).with_context(|| path.display().to_string())?;
                    ensure!(dim == *dimension, "{}: dimension {dim}, config says {dimension}", path.display());
                    let entries = rows
                        .into_iter()
                        .map(|(id, v)| Ok((id, EmbeddingVector::new(v)?)))
                        .collect::<erpipe_core::Result<Vec<_>>>()?;
                    let enc = LookupEncoder::new(dim, entries)?;
                    d.tuples()
                        .iter()
                        .map(|t| enc.get(&t.id).with_context(|| format!("{}: tuple {:?}", path.display(), t.id)))
                        .collect()
                };
                (lookup(left_path, &left)?, lookup(right_path, &right)?)
            }
        };
        let dim = self.config().embedding.dimension();
        let write = |d: &Dataset, vs: &[EmbeddingVector]| {
            formats::write_embeddings(
                Some(&self.hash),
                d.tuples().iter().zip(vs).map(|(t, v)| (t.id.as_str(), v.as_slice())),
                dim,
            )
        };
        let files = vec![(EMBED_LEFT, write(&left, &le)?), (EMBED_RIGHT, write(&right, &re)?)];
        self.commit(
            Stage::Embed,
            files,
            format!("{} + {} vectors of dimension {dim}", le.len(), re.len()),
        )
    }

    fn embeddings(&self, name: &str, d: &Dataset) -> anyhow::Result<Vec<EmbeddingVector>> {
        let text = self.read_artifact(name)?;
        let (_, rows) = formats::read_embeddings(&text).with_context(|| name.to_string())?;
        ensure!(rows.len() == d.len(), "{name}: {} vectors for {} tuples", rows.len(), d.len());
        rows.into_iter()
            .zip(d.tuples())
            .map(|((id, v), t)| {
                ensure!(id == t.id, "{name}: expected id {:?}, found {id:?}", t.id);
                Ok(EmbeddingVector::new(v)?)
            })
            .collect()
    }

    fn all_embeddings(
        &self,
        left: &Dataset,
        right: &Dataset,
    ) -> anyhow::Result<(Vec<EmbeddingVector>, Vec<EmbeddingVector>)> {
        Ok((self.embeddings(EMBED_LEFT, left)?, self.embeddings(EMBED_RIGHT, right)?))
    }

    fn block(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (le, re) = self.all_embeddings(&left, &right)?;
        let k = self.config().blocking_k;
        let cands = block_neighbors(&neighbor_lists(&le, &re, k), k);
        let (li, ri) = (IdIndex::new(&left, "left"), IdIndex::new(&right, "right"));
        let text = formats::write_pairs(Some(&self.hash), &cands.pairs, &li, &ri)?;
        self.commit(
            Stage::Block,
            vec![(CANDIDATES, text)],
            format!("{} candidate pairs (k = {k})", cands.len()),
        )
    }

    fn label(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (li, ri) = (IdIndex::new(&left, "left"), IdIndex::new(&right, "right"));
        let (positives, negatives) = match &self.config().labels_path {
            Some(p) => {
                let path = self.loaded.resolve(p);
                let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                formats::read_labels(&text, &li, &ri).with_context(|| path.display().to_string())?
            }
            None => {
                let (le, re) = self.all_embeddings(&left, &right)?;
                let positives = rplg_neighbors(&neighbor_lists(&le, &re, 2), &self.config().rplg);
                let negatives = snlg(&le, &re, &positives, &self.config().snlg)?;
                (positives, negatives)
            }
        };
        let text = formats::write_labels(Some(&self.hash), &positives, &negatives, &li, &ri)?;
        self.commit(
            Stage::Label,
            vec![(LABELS, text)],
            format!("{} positive and {} negative labels", positives.len(), negatives.len()),
        )
    }

    fn labels(&self, left: &Dataset, right: &Dataset) -> anyhow::Result<(erpipe_core::labels::PositiveLabels, erpipe_core::labels::NegativeLabels)> {
        let text = self.read_artifact(LABELS)?;
        let (li, ri) = (IdIndex::new(left, "left"), IdIndex::new(right, "right"));
        formats::read_labels(&text, &li, &ri).context(LABELS)
    }

    fn graph(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (gl, gr) = (mrgc(&left), mrgc(&right));
        let side = |d: &Dataset, g| GraphSideStats {
            mrgc: graph_stats(g),
            embdi: reference_graph(d, ReferenceStyle::Embdi),
            grapher: reference_graph(d, ReferenceStyle::Grapher),
        };
        let report = GraphStatsReport {
            config_hash: self.hash.clone(),
            left: side(&left, &gl),
            right: side(&right, &gr),
        };
        let h = Some(self.hash.as_str());
        let files = vec![
            (GRAPH_STATS, serde_json::to_string_pretty(&report)? + "\n"),
            (GRAPH_LEFT_TRIPLES, formats::write_graph_triples(h, &gl)),
            (GRAPH_LEFT_NODES, formats::write_graph_nodes(h, &gl, &left)),
            (GRAPH_RIGHT_TRIPLES, formats::write_graph_triples(h, &gr)),
            (GRAPH_RIGHT_NODES, formats::write_graph_nodes(h, &gr, &right)),
        ];
        let (a, b) = (report.left.mrgc, report.right.mrgc);
        self.commit(
            Stage::Graph,
            files,
            format!(
                "left {} nodes / {} edges, right {} nodes / {} edges",
                a.nodes, a.edges, b.nodes, b.edges
            ),
        )
    }

    fn train_graph(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (positives, negatives) = self.labels(&left, &right)?;
        let (gl, gr) = (mrgc(&left), mrgc(&right));
        let model = train(&gl, &gr, &positives, &negatives, &self.config().graph)?;
        let ck = GraphCheckpoint {
            params: model.params,
            left: model.left,
            right: model.right,
        };
        let h = Some(self.hash.as_str());
        let (first, last) = (model.trace[0], *model.trace.last().unwrap());
        self.commit(
            Stage::TrainGraph,
            vec![
                (GRAPH_MODEL, formats::write_graph_checkpoint(h, &ck)),
                (GRAPH_LOSS, formats::write_graph_loss(h, &model.trace)),
            ],
            format!("margin loss {first:.4} -> {last:.4}"),
        )
    }

    /// Graph embeddings for the classifier, zeroed when graph features are
    /// disabled.
    fn graph_inputs(&self, left: &Dataset, right: &Dataset) -> anyhow::Result<(Matrix, Matrix)> {
        let ck = formats::read_graph_checkpoint(&self.read_artifact(GRAPH_MODEL)?).context(GRAPH_MODEL)?;
        ensure!(
            ck.left.rows() == left.len() && ck.right.rows() == right.len(),
            "{GRAPH_MODEL} does not match the datasets"
        );
        if self.config().collab.use_graph_features {
            Ok((ck.left, ck.right))
        } else {
            Ok((
                Matrix::zeros(ck.left.rows(), ck.left.cols()),
                Matrix::zeros(ck.right.rows(), ck.right.cols()),
            ))
        }
    }

    fn train_collab(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (le, re) = self.all_embeddings(&left, &right)?;
        let (gl, gr) = self.graph_inputs(&left, &right)?;
        let (positives, negatives) = self.labels(&left, &right)?;
        let examples = labeled_pairs(&positives, &negatives);
        let inputs = PairInputs {
            left_sentence: &le,
            right_sentence: &re,
            left_graph: &gl,
            right_graph: &gr,
        };
        let model = train_collab(&examples, inputs, &self.config().collab)?;
        let h = Some(self.hash.as_str());
        let (first, last) = (model.trace[0].total, model.trace.last().unwrap().total);
        self.commit(
            Stage::TrainCollab,
            vec![
                (COLLAB_MODEL, formats::write_collab_model(h, &model.params)),
                (COLLAB_LOSS, formats::write_collab_loss(h, &model.trace)),
            ],
            format!("collaborative loss {first:.4} -> {last:.4} over {} pairs", examples.len()),
        )
    }

    fn candidates(&self, li: &IdIndex, ri: &IdIndex) -> anyhow::Result<Vec<(usize, usize)>> {
        formats::read_pairs(&self.read_artifact(CANDIDATES)?, li, ri).context(CANDIDATES)
    }

    fn predict(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (li, ri) = (IdIndex::new(&left, "left"), IdIndex::new(&right, "right"));
        let (le, re) = self.all_embeddings(&left, &right)?;
        let (gl, gr) = self.graph_inputs(&left, &right)?;
        let params = formats::read_collab_model(&self.read_artifact(COLLAB_MODEL)?).context(COLLAB_MODEL)?;
        let cands = self.candidates(&li, &ri)?;
        let inputs = PairInputs {
            left_sentence: &le,
            right_sentence: &re,
            left_graph: &gl,
            right_graph: &gr,
        };
        let preds = predict(&params, &cands, inputs, self.config().collab.decision_threshold)?;
        let matched = preds.iter().filter(|p| p.matched).count();
        let text = formats::write_predictions(Some(&self.hash), &preds, &li, &ri)?;
        self.commit(
            Stage::Predict,
            vec![(PREDICTIONS, text)],
            format!("{matched} of {} candidates predicted as matches", preds.len()),
        )
    }

    fn predictions(&self, li: &IdIndex, ri: &IdIndex) -> anyhow::Result<Vec<erpipe_core::collab::Prediction>> {
        formats::read_predictions(&self.read_artifact(PREDICTIONS)?, li, ri).context(PREDICTIONS)
    }

    fn eval(&self) -> anyhow::Result<StageReport> {
        let truth_path = self
            .config()
            .ground_truth_path
            .as_ref()
            .ok_or_else(|| anyhow!("ground_truth_path is not set in the config"))?;
        let (left, right) = self.datasets()?;
        let (li, ri) = (IdIndex::new(&left, "left"), IdIndex::new(&right, "right"));
        let path = self.loaded.resolve(truth_path);
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let truth = GroundTruth::new(formats::read_pairs(&text, &li, &ri).with_context(|| path.display().to_string())?);
        let preds = self.predictions(&li, &ri)?;
        let cands = self.candidates(&li, &ri)?;
        let (positives, negatives) = self.labels(&left, &right)?;

        let predicted: BTreeSet<(usize, usize)> = preds.iter().filter(|p| p.matched).map(|p| (p.left, p.right)).collect();
        let split = split_candidates(&cands, self.config().seed)?;
        let test = score_predictions(&predicted, &truth, &split.test);
        let all_candidates = score_predictions(&predicted, &truth, &cands);
        let in_cands = cands.iter().filter(|p| truth.contains(**p)).count();
        let blocking = BlockingReport {
            candidates: cands.len(),
            truth: truth.matches.len(),
            truth_in_candidates: in_cands,
            recall: if truth.matches.is_empty() {
                0.0
            } else {
                in_cands as f64 / truth.matches.len() as f64
            },
        };
        let report = EvalReport {
            config_hash: self.hash.clone(),
            test,
            all_candidates,
            blocking,
            labels: score_labels(&positives, &negatives, &truth),
            split: SplitSizes {
                train: split.train.len(),
                validation: split.validation.len(),
                test: split.test.len(),
            },
        };
        let text = serde_json::to_string_pretty(&report)? + "\n";
        self.commit(
            Stage::Eval,
            vec![(EVAL, text)],
            format!(
                "test F1 {:.4} (P {:.4}, R {:.4}); blocking recall {:.4}",
                test.f1, test.precision, test.recall, blocking.recall
            ),
        )
    }

    fn anomaly(&self) -> anyhow::Result<StageReport> {
        let (left, right) = self.datasets()?;
        let (li, ri) = (IdIndex::new(&left, "left"), IdIndex::new(&right, "right"));
        let preds = self.predictions(&li, &ri)?;
        let matches: Vec<(usize, usize)> = preds.iter().filter(|p| p.matched).map(|p| (p.left, p.right)).collect();
        let cfg = &self.config().anomaly;
        let mapping = match &cfg.mapping {
            Some(pairs) => AttributeMapping::from_names(&left, &right, pairs)?,
            None => AttributeMapping::by_name(&left, &right),
        };
        let records = detect_anomalies(&left, &right, &matches, &mapping, cfg.jaccard_threshold)?;
        let mut text = String::new();
        for r in &records {
            let line = AnomalyLine {
                config_hash: self.hash.clone(),
                record: r.clone(),
            };
            text.push_str(&serde_json::to_string(&line)?);
            text.push('\n');
        }
        let contradictions = records.iter().filter(|r| r.kind == AnomalyKind::Contradiction).count();
        let mut report = self.commit(
            Stage::Anomaly,
            vec![(ANOMALIES, text)],
            format!(
                "{contradictions} contradictions, {} one-side-missing over {} matched pairs",
                records.len() - contradictions,
                matches.len()
            ),
        )?;
        report.table = Some(anomaly_table(&records));
        Ok(report)
    }
}

/// Plain-text table; values of contradiction records are wrapped in `**`.
pub fn anomaly_table(records: &[AnomalyRecord]) -> String {
    let mut rows: Vec<[String; 6]> = vec![[
        "left_id".into(),
        "right_id".into(),
        "attribute".into(),
        "left_value".into(),
        "right_value".into(),
        "kind".into(),
    ]];
    for r in records {
        let mark = |v: &Option<String>| match (v, r.kind) {
            (None, _) => "-".to_string(),
            (Some(v), AnomalyKind::Contradiction) => format!("**{v}**"),
            (Some(v), AnomalyKind::OneSideMissing) => v.clone(),
        };
        let attribute = if r.left_attribute == r.right_attribute {
            r.left_attribute.clone()
        } else {
            format!("{}/{}", r.left_attribute, r.right_attribute)
        };
        let kind = match r.kind {
            AnomalyKind::Contradiction => "contradiction",
            AnomalyKind::OneSideMissing => "one-side-missing",
        };
        rows.push([
            r.left_id.clone(),
            r.right_id.clone(),
            attribute,
            mark(&r.left_value),
            mark(&r.right_value),
            kind.into(),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
