use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use erpipe_core::anomaly::DEFAULT_JACCARD_THRESHOLD;
use erpipe_core::blocking::DEFAULT_K;
use erpipe_core::collab::CsflConfig;
use erpipe_core::embedding::ProviderSpec;
use erpipe_core::gnn::GraphTrainConfig;
use erpipe_core::labels::{RplgConfig, SnlgConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalyConfig {
    pub jaccard_threshold: f64,
    /// Explicit `[left, right]` attribute pairs; `None` maps attributes with
    /// equal lowercase names.
    pub mapping: Option<Vec<(String, String)>>,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        Self {
            jaccard_threshold: DEFAULT_JACCARD_THRESHOLD,
            mapping: None,
        }
    }
}

/// Relative paths are resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub left_path: PathBuf,
    pub right_path: PathBuf,
    /// Column holding tuple ids in both files; row indices when absent.
    pub id_column: Option<String>,
    pub ground_truth_path: Option<PathBuf>,
    /// Supervised mode: use this label TSV instead of generating labels.
    pub labels_path: Option<PathBuf>,
    pub embedding: ProviderSpec,
    pub blocking_k: usize,
    pub rplg: RplgConfig,
    pub snlg: SnlgConfig,
    pub graph: GraphTrainConfig,
    pub collab: CsflConfig,
    /// Seed of the train/validation/test split.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub anomaly: AnomalyConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            left_path: PathBuf::from("left.csv"),
            right_path: PathBuf::from("right.csv"),
            id_column: None,
            ground_truth_path: None,
            labels_path: None,
            embedding: ProviderSpec::default(),
            blocking_k: DEFAULT_K,
            rplg: RplgConfig::default(),
            snlg: SnlgConfig::default(),
            graph: GraphTrainConfig::default(),
            collab: CsflConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            anomaly: AnomalyConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.embedding.validate()?;
        self.rplg.validate()?;
        self.snlg.validate()?;
        self.graph.validate()?;
        self.collab.validate()?;
        if self.blocking_k == 0 {
            bail!("blocking_k must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.anomaly.jaccard_threshold) {
            bail!("anomaly.jaccard_threshold must lie in [0, 1]");
        }
        Ok(())
    }

    /// Sets the split, graph and classifier seeds.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.graph.seed = seed;
        self.collab.seed = seed;
    }

    /// SHA-256 of the canonical JSON form, ignoring `output_dir` so the same
    /// run written to two places carries the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A config plus the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config = PipelineConfig::from_json(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base_dir = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
        Ok(Self { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
