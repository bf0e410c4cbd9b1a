use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use splal::config::{ExperimentConfig, Mode};
use splal::dataset::{sha256_hex, Dataset, Manifest};
use splal::metrics::{confusion_from_csv, MetricsReport};
use splal::model::Checkpoint;
use splal::orchestrator::RunReport;
use splal::run::{read_table, LAMBDA2_GRID, SCALAR_COLUMNS};

fn splal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splal"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    path
}

/// Small enough to keep CLI tests quick.
fn quick() -> ExperimentConfig {
    ExperimentConfig {
        epochs_stage: 2,
        stages: 2,
        ..Default::default()
    }
}

#[test]
fn generate_data_writes_default_benchmark_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("train.csv");
    let o = splal(&["generate-data", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = Dataset::load_csv(&out).unwrap();
    assert_eq!(data.len(), 780);
    assert_eq!(data.class_counts(), vec![500, 200, 60, 20]);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("train.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.samples, 780);
    assert_eq!(manifest.imbalance_ratio, 25.0);
    assert_eq!(manifest.csv_sha256, sha256_hex(&fs::read(&out).unwrap()));
}

#[test]
fn generate_data_replays_checksum_and_honours_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "counts = [30, 10, 5]\nheight = 8\nwidth = 8\nseed = 3\n").unwrap();
    let sums: Vec<String> = ["a.csv", "b.csv"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            assert!(splal(&["generate-data", "--spec", p(&spec), "--out", p(&out)])
                .status
                .success());
            sha256_hex(&fs::read(&out).unwrap())
        })
        .collect();
    assert_eq!(sums[0], sums[1]);
    assert_eq!(Dataset::load_csv(&dir.path().join("a.csv")).unwrap().len(), 45);
}

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(splal(&["generate-data"]).status.code(), Some(1));
    assert_eq!(splal(&["no-such-command"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "lambda1 = 0.9\nlambda2 = 0.4\nalpha1 = 0.5\n").unwrap();
    let o = splal(&["train", "--config", p(&bad), "--out-dir", p(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("lambda1 + lambda2") && err.contains("alpha1 + alpha2 + alpha3"),
        "{err}"
    );
    let cfg = write_config(dir.path(), &quick());
    let o = splal(&["ablate", "--config", p(&cfg), "--sweep", "beta"]);
    assert_eq!(o.status.code(), Some(1));
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "height = 4\n").unwrap();
    assert_eq!(
        splal(&[
            "generate-data",
            "--spec",
            p(&spec),
            "--out",
            p(&dir.path().join("x.csv"))
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn missing_files_fail() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent");
    let o = splal(&["evaluate", "--checkpoint", p(&missing), "--data", p(&missing)]);
    assert!(!o.status.success());
    let o = splal(&["train", "--config", p(&missing), "--out-dir", p(dir.path())]);
    assert!(!o.status.success());
}

#[test]
fn train_then_evaluate_reproduces_metrics_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick());
    let run = dir.path().join("run");
    let o = splal(&["train", "--config", p(&cfg), "--out-dir", p(&run)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let metrics = fs::read_to_string(run.join("metrics.json")).unwrap();
    let eval_dir = dir.path().join("eval");
    let o = splal(&[
        "evaluate",
        "--checkpoint",
        p(&run.join("checkpoint.json")),
        "--data",
        p(&run.join("test.csv")),
        "--out-dir",
        p(&eval_dir),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim_end(), metrics.trim_end());
    assert_eq!(fs::read_to_string(eval_dir.join("metrics.json")).unwrap(), metrics);
    assert_eq!(
        fs::read_to_string(eval_dir.join("confusion.csv")).unwrap(),
        fs::read_to_string(run.join("confusion.csv")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(eval_dir.join("roc.csv")).unwrap(),
        fs::read_to_string(run.join("roc.csv")).unwrap()
    );
}

#[test]
fn emitted_files_round_trip_through_their_readers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick());
    let run = dir.path().join("run");
    assert!(splal(&["train", "--config", p(&cfg), "--out-dir", p(&run)])
        .status
        .success());

    let echoed = ExperimentConfig::load(&run.join("config.toml")).unwrap();
    assert_eq!(echoed, quick());
    let report: RunReport = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.stages.len(), 2);
    let metrics: MetricsReport = serde_json::from_str(&fs::read_to_string(run.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics, report.metrics);
    let confusion = confusion_from_csv(&fs::read_to_string(run.join("confusion.csv")).unwrap()).unwrap();
    assert_eq!(confusion, metrics.confusion);
    let ckpt = Checkpoint::load(&run.join("checkpoint.json")).unwrap();
    assert_eq!(ckpt.seed, 0);
    assert_eq!(Dataset::load_csv(&run.join("test.csv")).unwrap().len(), 200);

    let (h, rows) = read_table(&fs::read_to_string(run.join("loss_log.csv")).unwrap()).unwrap();
    assert_eq!(h, ["phase", "stage", "epoch", "classification", "alignment", "total"]);
    assert_eq!(rows.len(), 5 + 2 * 2);
    for r in &rows {
        for v in &r[3..] {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
    let (h, rows) = read_table(&fs::read_to_string(run.join("roc.csv")).unwrap()).unwrap();
    assert_eq!(h, ["class", "threshold", "fpr", "tpr"]);
    assert!(!rows.is_empty());
    let (h, rows) = read_table(&fs::read_to_string(run.join("selector_audit.csv")).unwrap()).unwrap();
    assert_eq!(h.len(), 5 + 2 * 4);
    let pool: usize = report.stages.iter().map(|s| s.pool_before).sum();
    assert_eq!(rows.len(), pool);
    let (h, rows) = read_table(&fs::read_to_string(run.join("pseudo_labels.csv")).unwrap()).unwrap();
    assert_eq!(h.len(), 7 + 4 * 4);
    let selected: usize = report.stages.iter().map(|s| s.selected).sum();
    assert_eq!(rows.len(), selected);
}

#[test]
fn baseline_mode_forces_supervised_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &ExperimentConfig {
            mode: Mode::Baseline,
            ..quick()
        },
    );
    let run = dir.path().join("run");
    assert!(splal(&["train", "--config", p(&cfg), "--out-dir", p(&run)])
        .status
        .success());
    let report: RunReport = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert!(report.stages.is_empty());
    assert!(report.warmup_losses.iter().all(|e| e.total == e.classification));
    assert_eq!(report.metrics, report.warmup_metrics);
}

#[test]
fn multi_seed_train_writes_subdirectories_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &ExperimentConfig {
            seeds: vec![3, 4, 5],
            ..quick()
        },
    );
    let run = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_splal"))
        .args(["train", "--config", p(&cfg), "--out-dir", p(&run)])
        .env("SPLAL_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut f1 = Vec::new();
    for s in [3, 4, 5] {
        let m: MetricsReport =
            serde_json::from_str(&fs::read_to_string(run.join(format!("seed_{s}/metrics.json"))).unwrap()).unwrap();
        f1.push(m.macro_f1);
    }
    let (h, rows) = read_table(&fs::read_to_string(run.join("aggregate.csv")).unwrap()).unwrap();
    assert_eq!(h, ["metric", "mean", "sd", "n"]);
    assert_eq!(rows.len(), SCALAR_COLUMNS.len());
    let row = rows.iter().find(|r| r[0] == "macro_f1").unwrap();
    let mean = f1.iter().sum::<f64>() / 3.0;
    let sd = (f1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((row[1].parse::<f64>().unwrap() - mean).abs() < 1e-12);
    assert!((row[2].parse::<f64>().unwrap() - sd).abs() < 1e-12);
    assert_eq!(row[3], "3");

    let bad = Command::new(env!("CARGO_BIN_EXE_splal"))
        .args(["train", "--config", p(&cfg), "--out-dir", p(&run)])
        .env("SPLAL_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn ablate_emits_full_lambda2_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &ExperimentConfig {
            seeds: vec![0, 1],
            ..quick()
        },
    );
    let out = dir.path().join("l2.csv");
    let o = splal(&["ablate", "--config", p(&cfg), "--sweep", "lambda2", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_table(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(&h[..4], ["sweep", "value", "mode", "seed"]);
    assert_eq!(rows.len(), LAMBDA2_GRID.len() * 2);
    let values: Vec<f64> = rows.iter().step_by(2).map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values, LAMBDA2_GRID.to_vec());
}
