//! Run directories, multi-seed aggregation and ablation sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{confusion_to_csv, roc_to_csv, MetricsReport};
use crate::model::Checkpoint;
use crate::orchestrator::{run, RunOutput};
use crate::selector::gamma2_from_gamma1;

pub const CONFIG_FILE: &str = "config.toml";
pub const REPORT_FILE: &str = "report.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const LOSS_FILE: &str = "loss_log.csv";
pub const SELECTOR_FILE: &str = "selector_audit.csv";
pub const PSEUDO_FILE: &str = "pseudo_labels.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TEST_FILE: &str = "test.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn numbered(prefix: &str, k: usize) -> String {
    (0..k).map(|j| format!("{prefix}{j}")).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn metrics_json(m: &MetricsReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)?)
}

pub fn loss_log_csv(out: &RunOutput) -> String {
    let mut s = String::from("phase,stage,epoch,classification,alignment,total\n");
    for e in &out.report.warmup_losses {
        let _ = writeln!(
            s,
            "warmup,0,{},{:?},{:?},{:?}",
            e.epoch, e.classification, e.alignment, e.total
        );
    }
    for st in &out.report.stages {
        for e in &st.epoch_losses {
            let _ = writeln!(
                s,
                "stage,{},{},{:?},{:?},{:?}",
                st.stage, e.epoch, e.classification, e.alignment, e.total
            );
        }
    }
    s
}

pub fn selector_csv(out: &RunOutput, k: usize) -> String {
    let mut s = format!(
        "stage,id,truth,reliable,winner,{},{}\n",
        numbered("sim_", k),
        numbered("post_", k)
    );
    for r in &out.selector_audit {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.stage,
            r.id,
            opt(r.truth),
            r.reliable,
            opt(r.winner),
            join(&r.similarities),
            join(&r.posterior)
        );
    }
    s
}

pub fn pseudo_csv(out: &RunOutput, k: usize) -> String {
    let mut s = format!(
        "stage,id,truth,predicted,alpha1,alpha2,alpha3,{},{},{},{}\n",
        numbered("linear_", k),
        numbered("knn_", k),
        numbered("sim_", k),
        numbered("combined_", k)
    );
    for r in &out.pseudo_audit {
        let _ = writeln!(
            s,
            "{},{},{},{},{:?},{:?},{:?},{},{},{},{}",
            r.stage,
            r.id,
            opt(r.truth),
            r.predicted(),
            r.alphas.linear,
            r.alphas.knn,
            r.alphas.similarity,
            join(&r.linear),
            join(&r.knn),
            join(&r.similarity),
            join(&r.combined)
        );
    }
    s
}

/// Writes every artifact of one run into `dir`.
pub fn write_run_dir(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let k = out.ema.num_classes();
    write(&dir.join(CONFIG_FILE), &cfg.to_toml())?;
    write(&dir.join(REPORT_FILE), &serde_json::to_string_pretty(&out.report)?)?;
    write(&dir.join(METRICS_FILE), &metrics_json(&out.report.metrics)?)?;
    write(&dir.join(LOSS_FILE), &loss_log_csv(out))?;
    write(&dir.join(SELECTOR_FILE), &selector_csv(out, k))?;
    write(&dir.join(PSEUDO_FILE), &pseudo_csv(out, k))?;
    write(
        &dir.join(CONFUSION_FILE),
        &confusion_to_csv(&out.report.metrics.confusion),
    )?;
    write(&dir.join(ROC_FILE), &roc_to_csv(&out.roc))?;
    Checkpoint::new(out.report.seed, &out.ema, &out.live).save(&dir.join(CHECKPOINT_FILE))?;
    out.test.save_csv(&dir.join(TEST_FILE))
}

/// Headline scalars of one evaluation, in a fixed column order.
pub const SCALAR_COLUMNS: [&str; 7] = [
    "accuracy",
    "macro_f1",
    "macro_auc",
    "macro_precision",
    "macro_recall",
    "macro_specificity",
    "minority_recall",
];

/// Rarest class of the training counts; ties go to the higher index.
pub fn minority_class(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c <= counts[best] {
            best = k;
        }
    }
    best
}

pub fn scalars(m: &MetricsReport, minority: usize) -> [f64; 7] {
    [
        m.accuracy,
        m.macro_f1,
        m.macro_auc.unwrap_or(f64::NAN),
        m.macro_precision,
        m.macro_recall,
        m.macro_specificity,
        m.recall_of(minority),
    ]
}

/// Mean and sample standard deviation per scalar column.
pub fn aggregate_csv(rows: &[[f64; 7]]) -> String {
    let mut s = String::from("metric,mean,sd,n\n");
    let n = rows.len() as f64;
    for (j, name) in SCALAR_COLUMNS.iter().enumerate() {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let sd = if rows.len() > 1 {
            (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let _ = writeln!(s, "{name},{mean:?},{sd:?},{}", rows.len());
    }
    s
}

/// Runs every seed of `cfg` (in parallel) and returns outputs in seed order.
pub fn run_seeds(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<Vec<RunOutput>> {
    cfg.seeds
        .par_iter()
        .map(|&seed| run(cfg, seed, train, test.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sweep {
    Lambda2,
    Gamma1,
    Alpha,
    ClassifierCombo,
    LabelRatio,
}

impl std::str::FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda2" => Ok(Sweep::Lambda2),
            "gamma1" => Ok(Sweep::Gamma1),
            "alpha" => Ok(Sweep::Alpha),
            "classifier-combo" => Ok(Sweep::ClassifierCombo),
            "label-ratio" => Ok(Sweep::LabelRatio),
            _ => Err(Error::config(format!(
                "unknown sweep {s:?}; expected lambda2, gamma1, alpha, classifier-combo or label-ratio"
            ))),
        }
    }
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Lambda2 => "lambda2",
            Sweep::Gamma1 => "gamma1",
            Sweep::Alpha => "alpha",
            Sweep::ClassifierCombo => "classifier-combo",
            Sweep::LabelRatio => "label-ratio",
        }
    }
}

pub const LAMBDA2_GRID: [f64; 6] = [0.0, 0.10, 0.25, 0.40, 0.50, 0.60];
pub const GAMMA1_GRID: [f64; 4] = [0.90, 0.95, 0.99, 0.995];
pub const ALPHA_GRID: [(f64, f64, f64); 7] = [
    (0.35, 0.35, 0.30),
    (0.35, 0.15, 0.50),
    (0.25, 0.25, 0.50),
    (0.15, 0.35, 0.50),
    (0.20, 0.10, 0.70),
    (0.15, 0.15, 0.70),
    (0.10, 0.20, 0.70),
];
pub const LABEL_RATIO_GRID: [f64; 4] = [0.05, 0.10, 0.20, 0.30];

/// The configurations of a sweep, each with its label in the output CSV.
pub fn sweep_cells(sweep: Sweep, base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
    let with = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = base.clone();
        f(&mut c);
        c
    };
    match sweep {
        Sweep::Lambda2 => LAMBDA2_GRID
            .iter()
            .map(|&l2| {
                (
                    format!("{l2:.2}"),
                    with(&|c| {
                        c.lambda2 = l2;
                        c.lambda1 = 1.0 - l2;
                    }),
                )
            })
            .collect(),
        Sweep::Gamma1 => GAMMA1_GRID
            .iter()
            .map(|&g1| {
                (
                    format!("{g1}"),
                    with(&|c| {
                        c.gamma1 = g1;
                        c.gamma2 = Some(gamma2_from_gamma1(g1));
                    }),
                )
            })
            .collect(),
        Sweep::Alpha => ALPHA_GRID
            .iter()
            .map(|&(a1, a2, a3)| {
                (
                    format!("{a1:.2}/{a2:.2}/{a3:.2}"),
                    with(&|c| {
                        c.alpha1 = a1;
                        c.alpha2 = a2;
                        c.alpha3 = a3;
                    }),
                )
            })
            .collect(),
        Sweep::ClassifierCombo => {
            // a dropped classifier's weight is shared out proportionally
            let (l, n, s) = (base.alpha1, base.alpha2, base.alpha3);
            [
                ("similarity+knn+linear", (l, n, s)),
                ("similarity+linear", (l / (l + s), 0.0, s / (l + s))),
                ("similarity+knn", (0.0, n / (n + s), s / (n + s))),
            ]
            .into_iter()
            .map(|(name, (a1, a2, a3))| {
                (
                    name.to_string(),
                    with(&|c| {
                        c.alpha1 = a1;
                        c.alpha2 = a2;
                        c.alpha3 = a3;
                    }),
                )
            })
            .collect()
        }
        Sweep::LabelRatio => LABEL_RATIO_GRID
            .iter()
            .flat_map(|&r| [Mode::Baseline, Mode::Splal].into_iter().map(move |mode| (r, mode)))
            .map(|(r, mode)| {
                (
                    format!("{:.0}%", r * 100.0),
                    with(&|c| {
                        c.labeled_ratio = r;
                        c.mode = mode;
                    }),
                )
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub value: String,
    pub mode: Mode,
    pub seed: u64,
    pub scalars: [f64; 7],
    pub stage1_selected: Option<usize>,
    pub stage1_pseudo_accuracy: Option<f64>,
}

/// Every cell of the sweep for every seed; rows come back in cell-major,
/// seed-minor order whatever the thread count.
pub fn run_ablation(
    sweep: Sweep,
    base: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<Vec<AblationRow>> {
    let cells = sweep_cells(sweep, base);
    for (_, c) in &cells {
        c.effective().validate(train.num_classes)?;
    }
    let minority = minority_class(&train.class_counts());
    let jobs: Vec<(&String, &ExperimentConfig, u64)> = cells
        .iter()
        .flat_map(|(v, c)| c.seeds.iter().map(move |&s| (v, c, s)))
        .collect();
    jobs.par_iter()
        .map(|&(value, cfg, seed)| {
            let out = run(cfg, seed, train, test.clone())?;
            let first = out.report.stages.first();
            Ok(AblationRow {
                value: value.clone(),
                mode: cfg.mode,
                seed,
                scalars: scalars(&out.report.metrics, minority),
                stage1_selected: first.map(|s| s.selected),
                stage1_pseudo_accuracy: first.and_then(|s| s.pseudo_accuracy),
            })
        })
        .collect()
}

pub fn ablation_csv(sweep: Sweep, rows: &[AblationRow]) -> String {
    let mut s = format!(
        "sweep,value,mode,seed,{},stage1_selected,stage1_pseudo_accuracy\n",
        SCALAR_COLUMNS.join(",")
    );
    for r in rows {
        let mode = match r.mode {
            Mode::Baseline => "baseline",
            Mode::Splal => "splal",
        };
        let _ = writeln!(
            s,
            "{},{},{mode},{},{},{},{}",
            sweep.name(),
            r.value,
            r.seed,
            join(&r.scalars),
            opt(r.stage1_selected),
            r.stage1_pseudo_accuracy.map_or(String::new(), |a| format!("{a:?}"))
        );
    }
    s
}

/// Minimal reader for the CSV files above: header plus rows, each row
/// checked against the header width.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: "<table>".into(),
            line: 1,
            msg: "missing header".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::Parse {
                path: "<table>".into(),
                line: i + 2,
                msg: format!("{} fields, header has {}", row.len(), header.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grids_and_couplings() {
        let base = ExperimentConfig::default();
        let l2: Vec<f64> = sweep_cells(Sweep::Lambda2, &base)
            .iter()
            .map(|(_, c)| c.lambda2)
            .collect();
        assert_eq!(l2, LAMBDA2_GRID.to_vec());
        for (_, c) in sweep_cells(Sweep::Gamma1, &base) {
            assert_eq!(c.gate().gamma2, (1.0 - c.gamma1).abs() / 2.0);
            assert!(c.validate(4).is_ok());
        }
        for (_, c) in sweep_cells(Sweep::Alpha, &base)
            .iter()
            .chain(&sweep_cells(Sweep::ClassifierCombo, &base))
        {
            assert!(c.alphas().validate().is_ok(), "{:?}", c.alphas());
        }
        let ratios = sweep_cells(Sweep::LabelRatio, &base);
        assert_eq!(ratios.len(), 8);
        assert_eq!(ratios[0].0, "5%");
        assert!("nope".parse::<Sweep>().unwrap_err().is_config());
    }

    #[test]
    fn combo_variants_drop_one_classifier() {
        let cells = sweep_cells(Sweep::ClassifierCombo, &ExperimentConfig::default());
        let lin = cells[1].1.alphas();
        assert_eq!(lin.knn, 0.0);
        assert!((lin.similarity - 0.7 / 0.9).abs() < 1e-15);
        let knn = cells[2].1.alphas();
        assert_eq!(knn.linear, 0.0);
        assert!((knn.similarity - 0.7 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn aggregate_matches_hand_statistics() {
        let rows = [[1.0; 7], [3.0; 7]];
        let csv = aggregate_csv(&rows);
        let (header, body) = read_table(&csv).unwrap();
        assert_eq!(header, ["metric", "mean", "sd", "n"]);
        assert_eq!(body.len(), 7);
        assert_eq!(body[0][1].parse::<f64>().unwrap(), 2.0);
        assert_eq!(body[0][2].parse::<f64>().unwrap(), 2f64.sqrt());
    }

    #[test]
    fn minority_is_rarest() {
        assert_eq!(minority_class(&[500, 200, 60, 20]), 3);
        assert_eq!(minority_class(&[5, 1, 9]), 1);
    }

    #[test]
    fn ragged_table_is_rejected() {
        assert!(read_table("a,b\n1\n").is_err());
    }
}
