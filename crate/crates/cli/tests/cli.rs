//! Behaviour of the `solarcast` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use solarcast_cli::commands::{load_dataset, load_model};
use solarcast_core::models::Classifier;

const SMALL_CONFIG: &str = r#"
seed = 11

[synth]
n_hours = 1200

[evaluation]
train_len = 480
test_len = 120
step = 240

[[models.run]]
kind = "logistic"

[[models.run]]
kind = "forest"
n_trees = 12

[[models.run]]
kind = "gbt"
rounds = 15
"#;

fn solarcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solarcast")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn single_run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

#[test]
fn missing_config_is_a_usage_error_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solarcast(tmp.path(), &["--config", "nope.toml", "--output", "runs", "pipeline"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("nope.toml"));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn invalid_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "seed = 1\n[synth]\nbogus = 3\n").unwrap();
    let out = solarcast(tmp.path(), &["--config", "c.toml", "synth"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    fs::write(tmp.path().join("c.toml"), "seed = 1\n[synth]\nlatitude_deg = 80.0\n").unwrap();
    let out = solarcast(tmp.path(), &["--config", "c.toml", "synth"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn a_seed_is_required() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solarcast(tmp.path(), &["synth"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seed"), "{}", stderr(&out));
}

#[test]
fn bad_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(solarcast(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(solarcast(tmp.path(), &["--seed", "x", "synth"]).status.code(), Some(2));
    assert_eq!(solarcast(tmp.path(), &["--seed", "1", "--threads", "0", "synth"]).status.code(), Some(2));
    let help = solarcast(tmp.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("pipeline"));
}

#[test]
fn stages_out_of_order_are_runtime_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solarcast(tmp.path(), &["--seed", "1", "preprocess"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("synth"), "{}", stderr(&out));
    let out = solarcast(tmp.path(), &["--seed", "1", "compare"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn paper_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solarcast(tmp.path(), &["paper-check"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Random Forest accuracy: 0.9726204620814918"), "{text}");
    assert!(text.contains("XGBoost accuracy: 0.9726324905810166"), "{text}");
    assert!(text.contains(", 0 failed"), "{text}");
}

#[test]
fn separate_stages_reproduce_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), SMALL_CONFIG).unwrap();
    let out = solarcast(tmp.path(), &["--config", "c.toml", "--output", "a", "pipeline"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["Logistic Regression", "Random Forest", "Gradient Boosted Trees"] {
        assert!(stdout.contains(name), "{stdout}");
    }
    for stage in ["synth", "preprocess", "eda", "train", "evaluate", "compare"] {
        let out = solarcast(tmp.path(), &["--config", "c.toml", "--output", "b", stage]);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
    }
    let (a, b) = (single_run_dir(&tmp.path().join("a")), single_run_dir(&tmp.path().join("b")));
    assert_eq!(a.file_name(), b.file_name());
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    assert!(fa == fb, "stage-by-stage outputs differ from pipeline outputs");
    for expected in [
        "config.json",
        "data.csv",
        "features.csv",
        "labels.csv",
        "report.json",
        "comparison.csv",
        "models/gbt.json",
        "eda/correlation.csv",
    ] {
        assert!(fa.contains_key(Path::new(expected)), "missing {expected}");
    }

    // Trained models load back and score the exported features.
    let (_, ds) = load_dataset(&a).unwrap();
    for key in ["logistic", "forest", "gbt"] {
        let model = load_model(&a.join("models").join(format!("{key}.json"))).unwrap();
        assert_eq!(model.key(), key);
        let p = model.predict_proba(ds.features().row(0)).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn a_different_seed_gets_a_different_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let out = solarcast(tmp.path(), &["--seed", seed, "--output", "runs", "synth"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(fs::read_dir(tmp.path().join("runs")).unwrap().count(), 2);
}

#[test]
fn csv_input_replaces_the_generator() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), SMALL_CONFIG).unwrap();
    assert!(solarcast(tmp.path(), &["--config", "c.toml", "--output", "gen", "synth"]).status.success());
    let data = single_run_dir(&tmp.path().join("gen")).join("data.csv");
    fs::copy(&data, tmp.path().join("measured.csv")).unwrap();
    let columns = solarcast_core::synth::schema();
    let mut config = SMALL_CONFIG.to_string();
    config.push_str("\n[ingest]\npath = \"measured.csv\"\n");
    for (name, kind) in &columns.columns {
        let kind = match kind {
            solarcast_core::timeseries::ColumnKind::Continuous { .. } => "continuous",
            solarcast_core::timeseries::ColumnKind::Integer => "integer",
            solarcast_core::timeseries::ColumnKind::Categorical => "categorical",
        };
        config.push_str(&format!("[[ingest.columns]]\nname = \"{name}\"\nkind = \"{kind}\"\n"));
    }
    fs::write(tmp.path().join("csv.toml"), config).unwrap();
    let out = solarcast(tmp.path(), &["--config", "csv.toml", "--output", "csv", "pipeline"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let run = single_run_dir(&tmp.path().join("csv"));
    assert!(!run.join("data.csv").exists());
    // The measured file is the generated one, so the derived data matches.
    let gen = single_run_dir(&tmp.path().join("gen"));
    assert!(solarcast(tmp.path(), &["--config", "c.toml", "--output", "gen", "preprocess"]).status.success());
    assert_eq!(fs::read(run.join("labels.csv")).unwrap(), fs::read(gen.join("labels.csv")).unwrap());
}

#[test]
fn shipped_example_config_spells_out_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml");
    let parsed = solarcast_cli::config::parse(&fs::read_to_string(path).unwrap()).unwrap();
    let defaults = solarcast_core::pipeline::PipelineConfig { seed: Some(42), ..Default::default() };
    assert_eq!(parsed, defaults);
}
