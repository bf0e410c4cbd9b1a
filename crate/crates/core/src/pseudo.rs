//! Pseudo-labels as a weighted vote of three classifiers: the linear head,
//! a k-nearest-neighbour vote over labeled features, and the prototype
//! similarity winner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{cosine_similarity, one_hot_argmax, PROB_SUM_TOL};
use crate::selector::ReliabilityVerdict;

/// Weights of the linear, KNN and similarity classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub linear: f64,
    pub knn: f64,
    pub similarity: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Self {
            linear: 0.20,
            knn: 0.10,
            similarity: 0.70,
        }
    }
}

impl Alphas {
    pub fn new(linear: f64, knn: f64, similarity: f64) -> Result<Self> {
        let a = Self {
            linear,
            knn,
            similarity,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.linear, self.knn, self.similarity];
        if parts.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::config(format!("alphas must be nonnegative, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::config(format!("alphas must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

pub fn linear_prediction(model: &ModelParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(model.forward(x)?.probabilities)
}

/// A labeled feature available to the neighbour vote.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeature {
    pub id: usize,
    pub feature: Vec<f64>,
    /// One-hot for ground truth, soft for pseudo-labeled members.
    pub label: Vec<f64>,
}

/// Cosine distance; a zero-norm side counts as orthogonal.
fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine_similarity(a, b).unwrap_or(0.0)
}

/// Mean label of the `k` labeled features closest to `feature` under cosine
/// distance. Distance ties go to the smaller sample id.
pub fn knn_prediction(feature: &[f64], labeled: &[LabeledFeature], k: usize) -> Result<Vec<f64>> {
    if k == 0 || labeled.len() < k {
        return Err(Error::config(format!(
            "KNN needs 1 <= k <= |labeled|, got k = {k} with {} labeled",
            labeled.len()
        )));
    }
    let mut ranked: Vec<(f64, usize, usize)> = labeled
        .iter()
        .enumerate()
        .map(|(i, l)| (cosine_distance(feature, &l.feature), l.id, i))
        .collect();
    let by_rank = |a: &(f64, usize, usize), b: &(f64, usize, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, by_rank);
        ranked.truncate(k);
    }
    ranked.sort_by(by_rank);
    let classes = labeled[0].label.len();
    let mut out = vec![0.0; classes];
    for &(_, _, i) in &ranked {
        for (o, v) in out.iter_mut().zip(&labeled[i].label) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= k as f64);
    Ok(out)
}

/// One-hot at the similarity winner. Only defined for reliable verdicts.
pub fn similarity_prediction(verdict: &ReliabilityVerdict) -> Result<Vec<f64>> {
    if !verdict.reliable {
        return Err(Error::domain(
            "similarity prediction requested for an unreliable sample",
        ));
    }
    one_hot_argmax(&verdict.posterior)
}

/// `α_lin·linear + α_knn·knn + α_sim·similarity`, elementwise.
pub fn combine(linear: &[f64], knn: &[f64], similarity: &[f64], alphas: &Alphas) -> Result<Vec<f64>> {
    alphas.validate()?;
    if linear.len() != knn.len() || knn.len() != similarity.len() {
        return Err(Error::domain("classifier outputs differ in length"));
    }
    Ok(linear
        .iter()
        .zip(knn)
        .zip(similarity)
        .map(|((l, n), s)| alphas.linear * l + alphas.knn * n + alphas.similarity * s)
        .collect())
}

/// Audit row for one pseudo-labeled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelRecord {
    pub id: usize,
    pub stage: usize,
    pub linear: Vec<f64>,
    pub knn: Vec<f64>,
    pub similarity: Vec<f64>,
    pub combined: Vec<f64>,
    pub alphas: Alphas,
    pub truth: Option<usize>,
}

impl PseudoLabelRecord {
    pub fn predicted(&self) -> usize {
        crate::numerics::argmax(&self.combined).unwrap_or(0)
    }

    pub fn correct(&self) -> Option<bool> {
        self.truth.map(|t| t == self.predicted())
    }
}
