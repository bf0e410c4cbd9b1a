use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use splal::config::ExperimentConfig;
use splal::dataset::{generate, sha256_hex, Dataset, Manifest, SyntheticSpec};
use splal::metrics::{confusion_to_csv, roc_to_csv};
use splal::model::Checkpoint;
use splal::orchestrator::{evaluate, load_data};
use splal::run::{
    ablation_csv, aggregate_csv, metrics_json, minority_class, run_ablation, run_seeds, scalars, write_run_dir, Sweep,
    AGGREGATE_FILE, CONFUSION_FILE, METRICS_FILE, ROC_FILE,
};
use splal::{Error, Result};

/// Worker-count override for seed and sweep parallelism.
const WORKERS_ENV: &str = "SPLAL_WORKERS";

#[derive(Parser)]
#[command(
    name = "splal",
    version,
    about = "Prototype-gated semi-supervised training on image grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic dataset to CSV plus a JSON manifest.
    GenerateData {
        /// TOML synthetic spec; defaults apply to missing keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one run per configured seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score the EMA weights of a checkpoint on a labeled CSV.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Also write metrics, confusion and ROC files here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run one hyperparameter grid across all configured seeds.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        /// lambda2, gamma1, alpha, classifier-combo or label-ratio.
        #[arg(long)]
        sweep: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn generate_data(spec: Option<&Path>, out: &Path) -> Result<()> {
    let spec = match spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            toml::from_str::<SyntheticSpec>(&text)
                .map_err(|e| Error::Config(format!("{}: {}", p.display(), e.message())))?
        }
        None => SyntheticSpec::default(),
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let dataset = generate(&spec)?;
    let csv = dataset.to_csv_string();
    write(out, &csv)?;
    let manifest = Manifest::new(&spec, &dataset, &csv);
    write(&manifest_path(out), &serde_json::to_string_pretty(&manifest)?)?;
    info!(
        "wrote {} samples to {} (sha256 {})",
        dataset.len(),
        out.display(),
        manifest.csv_sha256
    );
    Ok(())
}

fn train(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let (train, test) = load_data(&cfg)?;
    for w in cfg.effective().validate(train.num_classes)? {
        warn!("{w}");
    }
    let outputs = run_seeds(&cfg, &train, &test)?;
    if let [single] = outputs.as_slice() {
        write_run_dir(out_dir, &cfg, single)?;
    } else {
        for out in &outputs {
            write_run_dir(&out_dir.join(format!("seed_{}", out.report.seed)), &cfg, out)?;
        }
        let minority = minority_class(&train.class_counts());
        let rows: Vec<[f64; 7]> = outputs.iter().map(|o| scalars(&o.report.metrics, minority)).collect();
        write(&out_dir.join(AGGREGATE_FILE), &aggregate_csv(&rows))?;
    }
    for out in &outputs {
        info!("seed {}: macro F1 {:.4}", out.report.seed, out.report.metrics.macro_f1);
    }
    Ok(())
}

fn evaluate_cmd(checkpoint: &Path, data: &Path, out_dir: Option<&Path>) -> Result<()> {
    let params = Checkpoint::load(checkpoint)?.ema_params()?;
    let data = Dataset::load_csv(data)?;
    let (report, roc) = evaluate(&params, &data)?;
    let json = metrics_json(&report)?;
    println!("{json}");
    if let Some(dir) = out_dir {
        write(&dir.join(METRICS_FILE), &json)?;
        write(&dir.join(CONFUSION_FILE), &confusion_to_csv(&report.confusion))?;
        write(&dir.join(ROC_FILE), &roc_to_csv(&roc))?;
    }
    Ok(())
}

fn ablate(config: &Path, sweep: &str, out: Option<&Path>) -> Result<()> {
    let sweep: Sweep = sweep.parse()?;
    let cfg = ExperimentConfig::load(config)?;
    let (train, test) = load_data(&cfg)?;
    let rows = run_ablation(sweep, &cfg, &train, &test)?;
    let csv = ablation_csv(sweep, &rows);
    match out {
        Some(p) => {
            write(p, &csv)?;
            info!(
                "wrote {} rows ({}) to {}",
                rows.len(),
                sha256_hex(csv.as_bytes()),
                p.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("{WORKERS_ENV}: {e}")))
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::GenerateData { spec, out } => generate_data(spec.as_deref(), &out),
        Command::Train { config, out_dir } => train(&config, &out_dir),
        Command::Evaluate {
            checkpoint,
            data,
            out_dir,
        } => evaluate_cmd(&checkpoint, &data, out_dir.as_deref()),
        Command::Ablate { config, sweep, out } => ablate(&config, &sweep, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
