use std::fs;
use std::path::{Path, PathBuf};

use erpipe::pipeline::*;
use erpipe::{LoadedConfig, Pipeline, STAGES};
use erpipe_core::synthetic::SyntheticSpec;

fn small_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec { left_size: 60, right_size: 70, matches: 40, seed, ..Default::default() }
}

/// Writes a small fixture and returns its config with fewer epochs.
fn fixture(dir: &Path) -> PathBuf {
    let path = erpipe::synthetic::write_fixture(dir, &small_spec(1)).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    cfg["graph"]["dim"] = 32.into();
    cfg["graph"]["margin"]["epochs"] = 10.into();
    cfg["collab"]["epochs"] = 20.into();
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn pipeline(config: &Path, out: &Path, force: bool) -> Pipeline {
    Pipeline::new(LoadedConfig::load(config).unwrap(), Some(out.to_path_buf()), force)
}

fn all_artifacts() -> Vec<&'static str> {
    STAGES.iter().flat_map(|s| s.artifacts().iter().copied()).collect()
}

#[test]
fn run_all_writes_every_artifact_and_no_partials() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let p = pipeline(&fixture(dir.path()), &out, false);
    let reports = p.run_all().unwrap();
    assert_eq!(reports.len(), STAGES.len());
    for name in all_artifacts() {
        assert!(out.join(name).is_file(), "{name}");
    }
    let partials = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".partial")).count();
    assert_eq!(partials, 0);
    let eval: EvalReport = serde_json::from_str(&fs::read_to_string(out.join(EVAL)).unwrap()).unwrap();
    assert_eq!(eval.config_hash, p.hash);
    assert_eq!(eval.split.train + eval.split.validation + eval.split.test, eval.blocking.candidates);
    assert_eq!(eval.blocking.truth, 40);
    for line in fs::read_to_string(out.join(ANOMALIES)).unwrap().lines() {
        let rec: AnomalyLine = serde_json::from_str(line).unwrap();
        assert_eq!(rec.config_hash, p.hash);
    }
}

#[test]
fn separate_stages_equal_run_all() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    pipeline(&config, &a, false).run_all().unwrap();
    for &stage in &STAGES {
        pipeline(&config, &b, false).run_stage(stage).unwrap();
    }
    for name in all_artifacts() {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn stale_artifacts_need_force() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("out");
    let p = pipeline(&config, &out, false);
    for stage in [Stage::Ingest, Stage::Embed, Stage::Block] {
        p.run_stage(stage).unwrap();
    }
    let mut changed = LoadedConfig::load(&config).unwrap();
    changed.config.rplg.theta = 0.1;
    let err = Pipeline::new(changed.clone(), Some(out.clone()), false).run_stage(Stage::Label).unwrap_err();
    assert_eq!(err.stage, Stage::Label);
    assert!(format!("{err}").contains("--force"), "{err}");
    assert!(!out.join(LABELS).exists());
    Pipeline::new(changed, Some(out.clone()), true).run_stage(Stage::Label).unwrap();
    assert!(out.join(LABELS).is_file());
}

#[test]
fn missing_upstream_artifact_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = pipeline(&fixture(dir.path()), &dir.path().join("out"), false);
    let err = p.run_stage(Stage::Block).unwrap_err();
    assert!(format!("{err}").contains(INGEST), "{err}");
}

#[test]
fn changed_inputs_after_ingest_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let p = pipeline(&config, &dir.path().join("out"), false);
    p.run_stage(Stage::Ingest).unwrap();
    let left = dir.path().join("left.csv");
    let mut text = fs::read_to_string(&left).unwrap();
    text.push_str("extra,a,b,c,d\n");
    fs::write(&left, text).unwrap();
    let err = p.run_stage(Stage::Embed).unwrap_err();
    assert!(format!("{err}").contains("rerun ingest"), "{err}");
}

#[test]
fn supervised_labels_replace_generation() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let truth = fs::read_to_string(dir.path().join("truth.tsv")).unwrap();
    let labels: String = truth.lines().map(|l| format!("{l}\t1\n")).collect();
    fs::write(dir.path().join("given.tsv"), &labels).unwrap();
    let mut loaded = LoadedConfig::load(&config).unwrap();
    loaded.config.labels_path = Some("given.tsv".into());
    let out = dir.path().join("out");
    let p = Pipeline::new(loaded, Some(out.clone()), false);
    for stage in [Stage::Ingest, Stage::Label] {
        p.run_stage(stage).unwrap();
    }
    let written = fs::read_to_string(out.join(LABELS)).unwrap();
    assert_eq!(written.lines().skip(1).count(), 40);
    assert!(written.lines().skip(1).all(|l| l.ends_with("\t1")));
}

#[test]
fn anomaly_table_lists_records() {
    use erpipe_core::anomaly::{AnomalyKind, AnomalyRecord};
    let rec = AnomalyRecord {
        left_id: "e1".into(),
        right_id: "e1'".into(),
        left_attribute: "Title".into(),
        right_attribute: "Title".into(),
        left_value: Some("sims 2".into()),
        right_value: Some("aspyr media inc sims 2".into()),
        kind: AnomalyKind::Contradiction,
    };
    let table = anomaly_table(&[rec]);
    assert!(table.contains("e1'") && table.contains("Title") && table.contains("aspyr media inc sims 2"), "{table}");
}
