use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use erpipe_core::synthetic::{make_synthetic, SyntheticSpec};

use crate::config::PipelineConfig;
use crate::csv::write_dataset;
use crate::formats::{write_pairs, IdIndex};

pub const ID_COLUMN: &str = "id";

/// Writes `left.csv`, `right.csv`, `truth.tsv` and a `config.json` pointing
/// at them into `dir`. Returns the config path.
pub fn write_fixture(dir: &Path, spec: &SyntheticSpec) -> anyhow::Result<PathBuf> {
    let data = make_synthetic(spec)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let write = |name: &str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))
    };
    write("left.csv", write_dataset(&data.left, Some(ID_COLUMN))?)?;
    write("right.csv", write_dataset(&data.right, Some(ID_COLUMN))?)?;
    let (li, ri) = (IdIndex::new(&data.left, "left"), IdIndex::new(&data.right, "right"));
    write("truth.tsv", write_pairs(None, &data.truth, &li, &ri)?)?;
    let config = PipelineConfig {
        left_path: "left.csv".into(),
        right_path: "right.csv".into(),
        id_column: Some(ID_COLUMN.into()),
        ground_truth_path: Some("truth.tsv".into()),
        ..PipelineConfig::default()
    };
    write("config.json", serde_json::to_string_pretty(&config)? + "\n")?;
    Ok(dir.join("config.json"))
}
