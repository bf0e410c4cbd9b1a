//! Reliability gate: cosine similarity of a feature to every class prototype,
//! a temperature softmax over those similarities, and the two-threshold test.

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{cosine_similarity, max_similarity_posterior, softmax};
use crate::prototype::PrototypeBank;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// Minimum posterior of the winning class.
    pub gamma1: f64,
    /// Maximum posterior of every other class.
    pub gamma2: f64,
    /// Softmax temperature applied to the similarities.
    pub tau: f64,
}

impl Default for Gate {
    fn default() -> Self {
        Self {
            gamma1: 0.99,
            gamma2: 0.005,
            tau: 0.1,
        }
    }
}

impl Gate {
    /// `gamma1` may exceed one, which simply makes the gate unreachable.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
        }
        if num_classes > 0 && !(self.gamma1 > 1.0 / num_classes as f64) {
            return Err(Error::config(format!(
                "gamma1 = {} must exceed 1/K = {}",
                self.gamma1,
                1.0 / num_classes as f64
            )));
        }
        if !(self.gamma2 >= 0.0 && self.gamma2 < self.gamma1) {
            return Err(Error::config(format!(
                "gamma2 = {} must lie in [0, gamma1 = {})",
                self.gamma2, self.gamma1
            )));
        }
        Ok(())
    }

    /// Warns when no cosine-similarity vector can push a posterior to `gamma1`.
    pub fn reachability_warning(&self, num_classes: usize) -> Option<String> {
        let bound = max_similarity_posterior(num_classes, self.tau);
        (bound < self.gamma1).then(|| {
            format!(
                "gamma1 = {} is unattainable: with tau = {} and {} classes the largest \
                 possible similarity posterior is {:.6}",
                self.gamma1, self.tau, num_classes, bound
            )
        })
    }
}

/// `γ2 = |1 - γ1| / 2`, the coupling used by the γ1 sweep.
pub fn gamma2_from_gamma1(gamma1: f64) -> f64 {
    (1.0 - gamma1).abs() / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityVerdict {
    /// Cosine similarity to each prototype.
    pub similarities: Vec<f64>,
    /// Temperature softmax of `similarities`.
    pub posterior: Vec<f64>,
    pub reliable: bool,
    pub winner: Option<usize>,
}

/// `(true, Some(j))` iff `v[j] >= gamma1` and every other entry is `<= gamma2`.
pub fn is_reliable(v: &[f64], gamma1: f64, gamma2: f64) -> Result<(bool, Option<usize>)> {
    if !(gamma2 >= 0.0 && gamma2 < gamma1) {
        return Err(Error::config(format!(
            "threshold ordering violated: gamma2 = {gamma2}, gamma1 = {gamma1}"
        )));
    }
    let mut winner = None;
    for (j, &p) in v.iter().enumerate() {
        if p >= gamma1 {
            if winner.is_some() {
                return Ok((false, None));
            }
            winner = Some(j);
        } else if p > gamma2 {
            return Ok((false, None));
        }
    }
    Ok((winner.is_some(), winner))
}

pub fn similarity_vector(prototypes: &[Vec<f64>], feature: &[f64]) -> Result<Vec<f64>> {
    prototypes.iter().map(|c| cosine_similarity(c, feature)).collect()
}

/// Full verdict for one feature.
pub fn assess(prototypes: &[Vec<f64>], feature: &[f64], gate: &Gate) -> Result<ReliabilityVerdict> {
    let similarities = similarity_vector(prototypes, feature)?;
    let posterior = softmax(&similarities, gate.tau)?;
    let (reliable, winner) = is_reliable(&posterior, gate.gamma1, gate.gamma2)?;
    Ok(ReliabilityVerdict {
        similarities,
        posterior,
        reliable,
        winner,
    })
}

/// Like [`assess`], but a zero-norm feature or prototype (every rectifier
/// unit silent) yields a never-reliable verdict with zero similarities
/// instead of an error.
pub fn assess_or_reject(prototypes: &[Vec<f64>], feature: &[f64], gate: &Gate) -> Result<ReliabilityVerdict> {
    match assess(prototypes, feature, gate) {
        Err(Error::Domain(_)) => {
            let similarities = vec![0.0; prototypes.len()];
            let posterior = softmax(&similarities, gate.tau)?;
            Ok(ReliabilityVerdict {
                similarities,
                posterior,
                reliable: false,
                winner: None,
            })
        }
        other => other,
    }
}

/// One unlabeled sample after encoding and gating.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Position in the pool that was assessed.
    pub index: usize,
    pub id: usize,
    pub feature: Vec<f64>,
    /// Linear-head prediction from the same forward pass.
    pub probabilities: Vec<f64>,
    pub verdict: ReliabilityVerdict,
}

/// Encodes and gates every sample of `pool` against a prototype snapshot.
pub fn assess_pool(pool: &[Sample], model: &ModelParams, bank: &PrototypeBank, gate: &Gate) -> Result<Vec<Candidate>> {
    gate.validate(bank.num_classes())?;
    let prototypes = bank.prototypes()?;
    pool.iter()
        .enumerate()
        .map(|(index, s)| {
            let rec = model.forward(s.grid.data())?;
            let verdict = assess_or_reject(&prototypes, rec.feature(), gate)?;
            Ok(Candidate {
                index,
                id: s.id,
                feature: rec.feature().to_vec(),
                probabilities: rec.probabilities,
                verdict,
            })
        })
        .collect()
}

/// The reliable subset of `pool`; the pool itself is not modified.
pub fn select_reliable(
    pool: &[Sample],
    model: &ModelParams,
    bank: &PrototypeBank,
    gate: &Gate,
) -> Result<Vec<Candidate>> {
    Ok(assess_pool(pool, model, bank, gate)?
        .into_iter()
        .filter(|c| c.verdict.reliable)
        .collect())
}
