//! Experiment configuration: a flat TOML table with one key per knob.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::SyntheticSpec;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::AdamConfig;
use crate::prototype::DEFAULT_QUEUE_CAPACITY;
use crate::pseudo::Alphas;
use crate::selector::{gamma2_from_gamma1, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Supervised training on the labeled pool only.
    Baseline,
    Splal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,

    /// Training data; when absent a synthetic set is generated.
    pub train_csv: Option<PathBuf>,
    /// Held-out data; when absent a balanced synthetic set is generated.
    pub test_csv: Option<PathBuf>,
    pub counts: Vec<usize>,
    pub height: usize,
    pub width: usize,
    pub noise: f64,
    pub max_shift: f64,
    pub min_amplitude: f64,
    pub scale_jitter: f64,
    pub data_seed: u64,
    pub test_per_class: usize,

    pub labeled_ratio: f64,
    pub gamma1: f64,
    /// Falls back to `|1 - gamma1| / 2` when unset.
    pub gamma2: Option<f64>,
    pub tau: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub knn_k: usize,
    pub stages: usize,
    pub queue_capacity: usize,
    pub ema_decay: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub hidden: Vec<usize>,
    pub epochs_warmup: usize,
    pub epochs_stage: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,

    pub stop_gradient: bool,
    /// Store the argmax of the blended pseudo-label instead of the soft vector.
    pub hard_pseudo: bool,
    /// Push features of pseudo-labeled batch members into the prototype queues.
    pub pseudo_in_queue: bool,
    /// Select and pseudo-label with the EMA weights instead of the live ones.
    pub ema_for_pseudo: bool,
    /// Loss weight of pseudo-labeled samples relative to ground truth.
    pub pseudo_weight: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spec = SyntheticSpec::default();
        let adam = AdamConfig::default();
        let gate = Gate::default();
        let alphas = Alphas::default();
        Self {
            mode: Mode::Splal,
            train_csv: None,
            test_csv: None,
            counts: spec.counts,
            height: spec.height,
            width: spec.width,
            noise: spec.noise,
            max_shift: spec.max_shift,
            min_amplitude: spec.min_amplitude,
            scale_jitter: spec.scale_jitter,
            data_seed: spec.seed,
            test_per_class: 50,
            labeled_ratio: 0.1,
            gamma1: gate.gamma1,
            gamma2: Some(gate.gamma2),
            tau: gate.tau,
            alpha1: alphas.linear,
            alpha2: alphas.knn,
            alpha3: alphas.similarity,
            lambda1: 0.6,
            lambda2: 0.4,
            knn_k: 25,
            stages: 5,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            ema_decay: 0.99,
            lr: 0.02,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_eps: adam.eps,
            hidden: crate::model::DEFAULT_HIDDEN.to_vec(),
            epochs_warmup: 5,
            epochs_stage: 10,
            batch_size: 32,
            seeds: vec![0],
            stop_gradient: true,
            hard_pseudo: false,
            pseudo_in_queue: true,
            ema_for_pseudo: false,
            pseudo_weight: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Baseline mode runs no stages and no alignment term.
    pub fn effective(&self) -> Self {
        let mut c = self.clone();
        if c.mode == Mode::Baseline {
            c.stages = 0;
            c.lambda1 = 1.0;
            c.lambda2 = 0.0;
        }
        c
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            counts: self.counts.clone(),
            height: self.height,
            width: self.width,
            noise: self.noise,
            max_shift: self.max_shift,
            min_amplitude: self.min_amplitude,
            scale_jitter: self.scale_jitter,
            seed: self.data_seed,
        }
    }

    pub fn gate(&self) -> Gate {
        Gate {
            gamma1: self.gamma1,
            gamma2: self.gamma2.unwrap_or_else(|| gamma2_from_gamma1(self.gamma1)),
            tau: self.tau,
        }
    }

    pub fn alphas(&self) -> Alphas {
        Alphas {
            linear: self.alpha1,
            knn: self.alpha2,
            similarity: self.alpha3,
        }
    }

    pub fn loss_spec(&self) -> LossSpec {
        LossSpec {
            lambda_cls: self.lambda1,
            lambda_align: self.lambda2,
            stop_gradient: self.stop_gradient,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    /// Checks every field and returns the non-fatal warnings. All violations
    /// are reported together, one per line.
    pub fn validate(&self, num_classes: usize) -> Result<Vec<String>> {
        let mut errors = Vec::new();
        let mut check = |ok: bool, field: &str, msg: String| {
            if !ok {
                errors.push(format!("{field}: {msg}"));
            }
        };
        check(
            self.labeled_ratio > 0.0 && self.labeled_ratio <= 1.0,
            "labeled_ratio",
            format!("must lie in (0, 1], got {}", self.labeled_ratio),
        );
        let gate = self.gate();
        check(
            self.tau > 0.0 && self.tau.is_finite(),
            "tau",
            format!("must be positive, got {}", self.tau),
        );
        check(
            self.gamma1 > 1.0 / num_classes.max(1) as f64,
            "gamma1",
            format!(
                "must exceed 1/K = {}, got {}",
                1.0 / num_classes.max(1) as f64,
                self.gamma1
            ),
        );
        check(
            gate.gamma2 >= 0.0 && gate.gamma2 < gate.gamma1,
            "gamma2",
            format!("must lie in [0, gamma1), got {}", gate.gamma2),
        );
        for (name, a) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
        ] {
            check(a >= 0.0, name, format!("must be nonnegative, got {a}"));
        }
        let asum = self.alpha1 + self.alpha2 + self.alpha3;
        check(
            (asum - 1.0).abs() <= crate::numerics::PROB_SUM_TOL,
            "alpha1 + alpha2 + alpha3",
            format!("must equal 1, got {asum}"),
        );
        for (name, l) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            check(l >= 0.0, name, format!("must be nonnegative, got {l}"));
        }
        let lsum = self.lambda1 + self.lambda2;
        check(
            (lsum - 1.0).abs() <= 1e-9,
            "lambda1 + lambda2",
            format!("must equal 1, got {lsum}"),
        );
        check(self.knn_k >= 1, "knn_k", "must be at least 1".into());
        check(self.queue_capacity >= 1, "queue_capacity", "must be at least 1".into());
        check(
            (0.0..=1.0).contains(&self.ema_decay),
            "ema_decay",
            format!("must lie in [0, 1], got {}", self.ema_decay),
        );
        check(
            self.lr > 0.0 && self.lr.is_finite(),
            "lr",
            format!("must be positive, got {}", self.lr),
        );
        check(
            (0.0..1.0).contains(&self.beta1),
            "beta1",
            format!("must lie in [0, 1), got {}", self.beta1),
        );
        check(
            (0.0..1.0).contains(&self.beta2),
            "beta2",
            format!("must lie in [0, 1), got {}", self.beta2),
        );
        check(
            self.adam_eps > 0.0,
            "adam_eps",
            format!("must be positive, got {}", self.adam_eps),
        );
        check(self.batch_size >= 1, "batch_size", "must be at least 1".into());
        check(!self.seeds.is_empty(), "seeds", "needs at least one seed".into());
        check(
            !self.hidden.is_empty() && !self.hidden.contains(&0),
            "hidden",
            format!("needs at least one nonzero width, got {:?}", self.hidden),
        );
        check(
            self.pseudo_weight > 0.0 && self.pseudo_weight <= 1.0,
            "pseudo_weight",
            format!("must lie in (0, 1], got {}", self.pseudo_weight),
        );
        check(self.test_per_class >= 1, "test_per_class", "must be at least 1".into());
        check(
            num_classes >= 2,
            "counts",
            format!("needs at least two classes, got {num_classes}"),
        );
        if !errors.is_empty() {
            return Err(Error::Config(errors.join("\n")));
        }
        Ok(gate.reachability_warning(num_classes).into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hyperparameters() {
        let c = ExperimentConfig::default();
        assert_eq!((c.gamma1, c.gate().gamma2), (0.99, 0.005));
        assert_eq!((c.alpha1, c.alpha2, c.alpha3), (0.2, 0.1, 0.7));
        assert_eq!((c.lambda1, c.lambda2), (0.6, 0.4));
        assert_eq!(c.batch_size, 32);
        assert!(c.validate(4).unwrap().is_empty());
    }

    #[test]
    fn empty_file_is_all_defaults_and_echo_round_trips() {
        let p = Path::new("x.toml");
        assert_eq!(ExperimentConfig::from_toml("", p).unwrap(), ExperimentConfig::default());
        let c = ExperimentConfig {
            gamma2: Some(0.01),
            seeds: vec![1, 2],
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml(), p).unwrap(), c);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentConfig::from_toml("gamma3 = 0.5\n", Path::new("x.toml")).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("gamma3"));
    }

    #[test]
    fn violations_are_named() {
        let c = ExperimentConfig {
            lambda2: 0.5,
            alpha3: 0.8,
            gamma2: Some(0.995),
            ..Default::default()
        };
        let msg = c.validate(4).unwrap_err().to_string();
        for field in ["lambda1 + lambda2", "alpha1 + alpha2 + alpha3", "gamma2"] {
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn unreachable_gate_warns() {
        let c = ExperimentConfig {
            tau: 1.0,
            ..Default::default()
        };
        let warnings = c.validate(7).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("0.551873"));
    }

    #[test]
    fn baseline_forces_supervised_only() {
        let c = ExperimentConfig {
            mode: Mode::Baseline,
            ..Default::default()
        }
        .effective();
        assert_eq!((c.stages, c.lambda1, c.lambda2), (0, 1.0, 0.0));
    }
}
