//! The staged self-training loop: warm-up on the labeled pool, then
//! repeatedly gate the unlabeled pool, pseudo-label the reliable part, move
//! it into the labeled pool and keep training.

use std::collections::{BTreeSet, HashMap};

use log::{debug, info};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{apply_flips, strong_augment, FlipDraw};
use crate::config::ExperimentConfig;
use crate::dataset::{generate, split_labeled, Dataset, Grid, Label, Sample};
use crate::error::{Error, Result};
use crate::loss::{backward, LossSample};
use crate::metrics::{MetricsReport, RocPoint};
use crate::model::{Adam, EmaParams, ModelParams};
use crate::numerics::{argmax, one_hot, one_hot_argmax};
use crate::prototype::PrototypeBank;
use crate::pseudo::{combine, knn_prediction, similarity_prediction, LabeledFeature, PseudoLabelRecord};
use crate::rng::{stream, Stream};
use crate::selector::{assess_pool, Candidate};

/// Labeled and unlabeled pools plus the migration history.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetState {
    pub labeled: Vec<Sample>,
    pub unlabeled: Vec<Sample>,
    pub stage: usize,
    /// Ids moved into the labeled pool, one entry per stage.
    pub history: Vec<Vec<usize>>,
    total: usize,
    pseudo_ids: BTreeSet<usize>,
}

impl DatasetState {
    pub fn new(labeled: Vec<Sample>, unlabeled: Vec<Sample>) -> Result<Self> {
        let state = Self {
            total: labeled.len() + unlabeled.len(),
            labeled,
            unlabeled,
            stage: 0,
            history: Vec::new(),
            pseudo_ids: BTreeSet::new(),
        };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Moves the samples with the given ids from the unlabeled pool into the
    /// labeled one, attaching their pseudo-labels.
    pub fn migrate(&mut self, labels: Vec<(usize, Vec<f64>)>) -> Result<()> {
        let stage = self.stage + 1;
        let mut incoming: HashMap<usize, Vec<f64>> = HashMap::with_capacity(labels.len());
        let mut ids = Vec::with_capacity(labels.len());
        for (id, probs) in labels {
            if !self.pseudo_ids.insert(id) || incoming.insert(id, probs).is_some() {
                return Err(Error::Training(format!("sample {id} pseudo-labeled twice")));
            }
            ids.push(id);
        }
        let mut kept = Vec::with_capacity(self.unlabeled.len());
        for mut s in std::mem::take(&mut self.unlabeled) {
            match incoming.remove(&s.id) {
                Some(probs) => {
                    s.label = Label::Pseudo { probs, stage };
                    self.labeled.push(s);
                }
                None => kept.push(s),
            }
        }
        self.unlabeled = kept;
        if let Some(id) = incoming.keys().min() {
            return Err(Error::Training(format!("sample {id} is not in the unlabeled pool")));
        }
        self.stage = stage;
        self.history.push(ids);
        self.check_invariants()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Training(format!("pool invariant violated: {msg}")));
        if self.labeled.len() + self.unlabeled.len() != self.total {
            return fail(format!(
                "{} + {} != {}",
                self.labeled.len(),
                self.unlabeled.len(),
                self.total
            ));
        }
        let mut seen = BTreeSet::new();
        for s in self.labeled.iter().chain(&self.unlabeled) {
            if !seen.insert(s.id) {
                return fail(format!("sample {} appears twice", s.id));
            }
        }
        if self.unlabeled.iter().any(|s| !matches!(s.label, Label::None)) {
            return fail("labeled sample in the unlabeled pool".into());
        }
        let pseudo = self
            .labeled
            .iter()
            .filter(|s| matches!(s.label, Label::Pseudo { .. }))
            .count();
        if pseudo != self.pseudo_ids.len() || self.labeled.iter().any(|s| matches!(s.label, Label::None)) {
            return fail("labeled pool and pseudo-label record disagree".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub classification: f64,
    pub alignment: f64,
    pub total: f64,
}

/// One selector verdict, for the audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorRow {
    pub stage: usize,
    pub id: usize,
    pub similarities: Vec<f64>,
    pub posterior: Vec<f64>,
    pub reliable: bool,
    pub winner: Option<usize>,
    pub truth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub pool_before: usize,
    pub selected: usize,
    pub selected_per_class: Vec<usize>,
    /// Share of pseudo-labels whose argmax matches the hidden truth.
    pub pseudo_accuracy: Option<f64>,
    /// Same ensemble on a random subset of the pool of equal size.
    pub random_subset_accuracy: Option<f64>,
    pub labeled_after: usize,
    pub unlabeled_after: usize,
    pub epoch_losses: Vec<EpochLoss>,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub warnings: Vec<String>,
    pub labeled_initial: usize,
    pub unlabeled_initial: usize,
    pub warmup_losses: Vec<EpochLoss>,
    pub warmup_metrics: MetricsReport,
    pub stages: Vec<StageReport>,
    /// Evaluation of the final EMA weights on the test set.
    pub metrics: MetricsReport,
}

pub struct RunOutput {
    pub report: RunReport,
    pub ema: ModelParams,
    pub live: ModelParams,
    pub roc: Vec<Vec<RocPoint>>,
    pub selector_audit: Vec<SelectorRow>,
    pub pseudo_audit: Vec<PseudoLabelRecord>,
    pub test: Dataset,
}

/// Probabilities of `params` on every sample of `data`, scored against the
/// hidden truth.
pub fn evaluate(params: &ModelParams, data: &Dataset) -> Result<(MetricsReport, Vec<Vec<RocPoint>>)> {
    if params.input_dim() != data.height * data.width || params.num_classes() != data.num_classes {
        return Err(Error::Evaluation(format!(
            "model expects {} inputs and {} classes, data has {}x{} grids and {} classes",
            params.input_dim(),
            params.num_classes(),
            data.height,
            data.width,
            data.num_classes
        )));
    }
    let mut scores = Vec::with_capacity(data.len());
    let mut truths = Vec::with_capacity(data.len());
    for s in &data.samples {
        let t = s
            .truth
            .ok_or_else(|| Error::Evaluation(format!("sample {} has no label to score against", s.id)))?;
        scores.push(params.forward(s.grid.data())?.probabilities);
        truths.push(t);
    }
    MetricsReport::new(&scores, &truths)
}

/// Training and test data for a config: CSV files when given, otherwise the
/// synthetic benchmark and its balanced held-out twin.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    match (&cfg.train_csv, &cfg.test_csv) {
        (Some(train), Some(test)) => {
            let train = Dataset::load_csv(train)?;
            let test = Dataset::load_csv(test)?;
            if (train.height, train.width, train.num_classes) != (test.height, test.width, test.num_classes) {
                return Err(Error::config("train_csv and test_csv differ in shape or class count"));
            }
            Ok((train, test))
        }
        (None, None) => {
            let spec = cfg.synthetic_spec();
            Ok((generate(&spec)?, generate(&spec.test_spec(cfg.test_per_class))?))
        }
        _ => Err(Error::config("train_csv and test_csv must be given together")),
    }
}

/// Owns one seeded run. The stepwise methods exist so tests can inspect the
/// pools between stages; [`run`] drives them in order.
pub struct Trainer {
    cfg: ExperimentConfig,
    seed: u64,
    num_classes: usize,
    pub state: DatasetState,
    live: ModelParams,
    adam: Adam,
    ema: Option<EmaParams>,
    bank: PrototypeBank,
    test: Dataset,
    strong: HashMap<usize, Vec<f64>>,
    shuffle_rng: ChaCha8Rng,
    augment_rng: ChaCha8Rng,
    subset_rng: ChaCha8Rng,
    warnings: Vec<String>,
    warmup_losses: Vec<EpochLoss>,
    warmup_metrics: Option<MetricsReport>,
    stages: Vec<StageReport>,
    selector_audit: Vec<SelectorRow>,
    pseudo_audit: Vec<PseudoLabelRecord>,
}

impl Trainer {
    /// Validates the config (after baseline overrides), splits the training
    /// data and initializes the model.
    pub fn new(cfg: &ExperimentConfig, seed: u64, train: &Dataset, test: Dataset) -> Result<Self> {
        let cfg = cfg.effective();
        let k = train.num_classes;
        let warnings = cfg.validate(k)?;
        for w in &warnings {
            log::warn!("{w}");
        }
        if let Some(c) = train.class_counts().iter().position(|&n| n == 0) {
            return Err(Error::UnseededClass(c));
        }
        let (labeled, unlabeled) = split_labeled(train, cfg.labeled_ratio, &mut stream(seed, Stream::Split))?;
        let mut dims = vec![train.height * train.width];
        dims.extend(&cfg.hidden);
        dims.push(k);
        let live = ModelParams::init(&dims, &mut stream(seed, Stream::Init))?;
        let adam = Adam::new(&live, cfg.adam());
        let bank = PrototypeBank::new(k, live.feature_dim(), cfg.queue_capacity)?;
        let mut strong = HashMap::with_capacity(train.len());
        for s in &train.samples {
            strong.insert(s.id, strong_augment(&s.grid)?.data().to_vec());
        }
        Ok(Self {
            seed,
            num_classes: k,
            state: DatasetState::new(labeled, unlabeled)?,
            live,
            adam,
            ema: None,
            bank,
            test,
            strong,
            shuffle_rng: stream(seed, Stream::Shuffle),
            augment_rng: stream(seed, Stream::Augment),
            subset_rng: stream(seed, Stream::Subset),
            warnings,
            warmup_losses: Vec::new(),
            warmup_metrics: None,
            stages: Vec::new(),
            selector_audit: Vec::new(),
            pseudo_audit: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn live(&self) -> &ModelParams {
        &self.live
    }

    pub fn bank(&self) -> &PrototypeBank {
        &self.bank
    }

    pub fn stage_reports(&self) -> &[StageReport] {
        &self.stages
    }

    pub fn warmup_losses(&self) -> &[EpochLoss] {
        &self.warmup_losses
    }

    fn queue_class(&self, s: &Sample) -> Option<usize> {
        match &s.label {
            Label::GroundTruth(k) => Some(*k),
            Label::Pseudo { probs, .. } if self.cfg.pseudo_in_queue => argmax(probs),
            _ => None,
        }
    }

    fn weight(&self, s: &Sample) -> f64 {
        match s.label {
            Label::Pseudo { .. } => self.cfg.pseudo_weight,
            _ => 1.0,
        }
    }

    /// `epochs` passes over the labeled pool. After warm-up every optimizer
    /// step also updates the EMA shadow and pushes the batch features into
    /// the prototype queues.
    fn train_epochs(&mut self, epochs: usize) -> Result<Vec<EpochLoss>> {
        let spec = self.cfg.loss_spec();
        let k = self.num_classes;
        let n = self.state.labeled.len();
        let mut losses = Vec::with_capacity(epochs);
        let mut order: Vec<usize> = (0..n).collect();
        for epoch in 0..epochs {
            order.shuffle(&mut self.shuffle_rng);
            let (mut cls, mut align, mut total) = (0.0, 0.0, 0.0);
            for chunk in order.chunks(self.cfg.batch_size) {
                let members: Vec<&Sample> = chunk.iter().map(|&i| &self.state.labeled[i]).collect();
                let weak: Vec<Grid> = members
                    .iter()
                    .map(|s| apply_flips(&s.grid, FlipDraw::sample(&mut self.augment_rng)))
                    .collect();
                let targets: Vec<Vec<f64>> = members
                    .iter()
                    .map(|s| s.target(k).expect("labeled pool holds labels"))
                    .collect();
                let batch: Vec<LossSample<'_>> = members
                    .iter()
                    .zip(&weak)
                    .zip(&targets)
                    .map(|((s, w), t)| LossSample {
                        input: s.grid.data(),
                        weak: w.data(),
                        strong: &self.strong[&s.id],
                        target: t,
                        weight: self.weight(s),
                    })
                    .collect();
                let out = backward(&self.live, &batch, &spec)?;
                let b = out.breakdown;
                let share = chunk.len() as f64 / n as f64;
                cls += b.classification * share;
                align += b.alignment * share;
                total += b.total * share;
                let classes: Vec<Option<usize>> = members.iter().map(|s| self.queue_class(s)).collect();
                self.adam.step(&mut self.live, &out.grads)?;
                if let Some(ema) = &mut self.ema {
                    ema.update(&self.live)?;
                    for (c, f) in classes.into_iter().zip(&out.features) {
                        if let Some(c) = c {
                            self.bank.push(c, f)?;
                        }
                    }
                }
            }
            debug!("seed {} epoch {epoch}: loss {total:.5}", self.seed);
            losses.push(EpochLoss {
                epoch,
                classification: cls,
                alignment: align,
                total,
            });
        }
        Ok(losses)
    }

    /// Trains on the labeled pool, then seeds every prototype queue with one
    /// full pass and starts the EMA shadow from the resulting weights.
    pub fn warmup(&mut self) -> Result<()> {
        self.warmup_losses = self.train_epochs(self.cfg.epochs_warmup)?;
        for i in 0..self.state.labeled.len() {
            let s = &self.state.labeled[i];
            if let Some(c) = self.queue_class(s) {
                let feature = self.live.forward(s.grid.data())?.feature().to_vec();
                self.bank.push(c, &feature)?;
            }
        }
        if let Some(c) = (0..self.num_classes).find(|&c| self.bank.queue_len(c) == 0) {
            return Err(Error::UnseededClass(c));
        }
        let ema = EmaParams::new(&self.live, self.cfg.ema_decay)?;
        self.warmup_metrics = Some(evaluate(ema.params(), &self.test)?.0);
        self.ema = Some(ema);
        info!(
            "seed {} warm-up done: macro F1 {:.4}",
            self.seed,
            self.warmup_metrics.as_ref().map_or(0.0, |m| m.macro_f1)
        );
        Ok(())
    }

    fn ema(&self) -> Result<&EmaParams> {
        self.ema
            .as_ref()
            .ok_or_else(|| Error::Training("stage requested before warm-up".into()))
    }

    pub fn can_continue(&self) -> bool {
        self.state.stage < self.cfg.stages && !self.state.unlabeled.is_empty()
    }

    fn ensemble(
        &self,
        c: &Candidate,
        labeled: &[LabeledFeature],
        knn_k: usize,
        similarity: Vec<f64>,
    ) -> Result<PseudoLabelRecord> {
        let knn = knn_prediction(&c.feature, labeled, knn_k)?;
        let alphas = self.cfg.alphas();
        let combined = combine(&c.probabilities, &knn, &similarity, &alphas)?;
        Ok(PseudoLabelRecord {
            id: c.id,
            stage: self.state.stage + 1,
            linear: c.probabilities.clone(),
            knn,
            similarity,
            combined,
            alphas,
            truth: self.state.unlabeled[c.index].truth,
        })
    }

    /// Gate, pseudo-label, migrate, then train `epochs_stage` more epochs.
    pub fn run_stage(&mut self) -> Result<&StageReport> {
        if !self.can_continue() {
            return Err(Error::Training("no stage left to run".into()));
        }
        let gate = self.cfg.gate();
        let selector_model = if self.cfg.ema_for_pseudo {
            self.ema()?.params().clone()
        } else {
            self.live.clone()
        };
        let stage = self.state.stage + 1;
        let pool_before = self.state.unlabeled.len();
        let candidates = assess_pool(&self.state.unlabeled, &selector_model, &self.bank, &gate)?;
        for c in &candidates {
            self.selector_audit.push(SelectorRow {
                stage,
                id: c.id,
                similarities: c.verdict.similarities.clone(),
                posterior: c.verdict.posterior.clone(),
                reliable: c.verdict.reliable,
                winner: c.verdict.winner,
                truth: self.state.unlabeled[c.index].truth,
            });
        }

        let labeled: Vec<LabeledFeature> = self
            .state
            .labeled
            .iter()
            .map(|s| {
                Ok(LabeledFeature {
                    id: s.id,
                    feature: selector_model.forward(s.grid.data())?.feature().to_vec(),
                    label: s.target(self.num_classes).expect("labeled pool holds labels"),
                })
            })
            .collect::<Result<_>>()?;
        let knn_k = self.cfg.knn_k.min(labeled.len());

        let mut records = Vec::new();
        for c in candidates.iter().filter(|c| c.verdict.reliable) {
            let sim = similarity_prediction(&c.verdict)?;
            records.push(self.ensemble(c, &labeled, knn_k, sim)?);
        }

        // the same ensemble on random unlabeled samples, gate ignored
        let mut subset: Vec<&Candidate> = candidates.iter().collect();
        subset.shuffle(&mut self.subset_rng);
        subset.truncate(records.len());
        let mut subset_hits = Vec::with_capacity(subset.len());
        for c in subset {
            let sim = one_hot_argmax(&c.verdict.posterior)?;
            subset_hits.push(self.ensemble(c, &labeled, knn_k, sim)?.correct());
        }

        let accuracy = |hits: Vec<Option<bool>>| -> Option<f64> {
            let known: Vec<bool> = hits.into_iter().flatten().collect();
            (!known.is_empty()).then(|| known.iter().filter(|&&h| h).count() as f64 / known.len() as f64)
        };
        let pseudo_accuracy = accuracy(records.iter().map(PseudoLabelRecord::correct).collect());
        let random_subset_accuracy = accuracy(subset_hits);

        let mut selected_per_class = vec![0; self.num_classes];
        let moves: Vec<(usize, Vec<f64>)> = records
            .iter()
            .map(|r| {
                selected_per_class[r.predicted()] += 1;
                let label = if self.cfg.hard_pseudo {
                    one_hot(r.predicted(), self.num_classes)
                } else {
                    r.combined.clone()
                };
                (r.id, label)
            })
            .collect();
        let selected = moves.len();
        self.state.migrate(moves)?;
        self.pseudo_audit.extend(records);
        info!(
            "seed {} stage {stage}: {selected}/{pool_before} reliable, pseudo accuracy {:?}",
            self.seed, pseudo_accuracy
        );

        let epoch_losses = self.train_epochs(self.cfg.epochs_stage)?;
        let metrics = evaluate(self.ema()?.params(), &self.test)?.0;
        self.stages.push(StageReport {
            stage,
            pool_before,
            selected,
            selected_per_class,
            pseudo_accuracy,
            random_subset_accuracy,
            labeled_after: self.state.labeled.len(),
            unlabeled_after: self.state.unlabeled.len(),
            epoch_losses,
            metrics,
        });
        Ok(self.stages.last().expect("just pushed"))
    }

    pub fn finish(self) -> Result<RunOutput> {
        let ema = self.ema()?.params().clone();
        let (metrics, roc) = evaluate(&ema, &self.test)?;
        let (labeled_initial, unlabeled_initial) = match self.state.history.first() {
            None => (self.state.labeled.len(), self.state.unlabeled.len()),
            Some(_) => {
                let moved: usize = self.state.history.iter().map(Vec::len).sum();
                (self.state.labeled.len() - moved, self.state.unlabeled.len() + moved)
            }
        };
        Ok(RunOutput {
            report: RunReport {
                seed: self.seed,
                warnings: self.warnings,
                labeled_initial,
                unlabeled_initial,
                warmup_losses: self.warmup_losses,
                warmup_metrics: self.warmup_metrics.expect("warm-up ran"),
                stages: self.stages,
                metrics,
            },
            ema,
            live: self.live,
            roc,
            selector_audit: self.selector_audit,
            pseudo_audit: self.pseudo_audit,
            test: self.test,
        })
    }
}

/// Warm-up, then stages until the stage budget or the unlabeled pool runs out.
pub fn run(cfg: &ExperimentConfig, seed: u64, train: &Dataset, test: Dataset) -> Result<RunOutput> {
    let mut trainer = Trainer::new(cfg, seed, train, test)?;
    trainer.warmup()?;
    while trainer.can_continue() {
        trainer.run_stage()?;
    }
    trainer.finish()
}
