//! Training objective: weighted classification cross-entropy on the original
//! input plus weighted alignment cross-entropy between the weak and strong
//! views, with exact gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Gradients, ModelParams};
use crate::numerics::{cross_entropy_unchecked, LOG_EPS};

/// One training sample with its pre-drawn augmented views.
#[derive(Debug, Clone, Copy)]
pub struct LossSample<'a> {
    pub input: &'a [f64],
    pub weak: &'a [f64],
    pub strong: &'a [f64],
    pub target: &'a [f64],
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub lambda_cls: f64,
    pub lambda_align: f64,
    /// Treat the weak-view prediction as a constant target.
    pub stop_gradient: bool,
}

impl LossSpec {
    pub fn new(lambda_cls: f64, lambda_align: f64) -> Result<Self> {
        let spec = Self {
            lambda_cls,
            lambda_align,
            stop_gradient: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cls >= 0.0 && self.lambda_align >= 0.0)
            || (self.lambda_cls + self.lambda_align - 1.0).abs() > 1e-9
        {
            return Err(Error::config(format!(
                "lambda1 = {} and lambda2 = {} must be nonnegative and sum to 1",
                self.lambda_cls, self.lambda_align
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub classification: f64,
    pub alignment: f64,
    pub total: f64,
    pub lambda_cls: f64,
    pub lambda_align: f64,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub breakdown: LossBreakdown,
    pub grads: Gradients,
    /// Encoder output for each sample's original input, in batch order.
    pub features: Vec<Vec<f64>>,
}

/// `∂ CE(target, softmax(z)) / ∂z`, honouring the log floor.
fn ce_grad_wrt_pred_logits(target: &[f64], p: &[f64]) -> Vec<f64> {
    let live: f64 = target
        .iter()
        .zip(p)
        .filter(|(_, &pk)| pk >= LOG_EPS)
        .map(|(t, _)| t)
        .sum();
    target
        .iter()
        .zip(p)
        .map(|(&t, &pj)| pj * live - if pj >= LOG_EPS { t } else { 0.0 })
        .collect()
}

/// `∂ CE(softmax(z), pred) / ∂z` for a target that is itself a softmax.
fn ce_grad_wrt_target_logits(q: &[f64], pred: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = pred.iter().map(|p| -p.max(LOG_EPS).ln()).collect();
    let mean: f64 = q.iter().zip(&logs).map(|(a, b)| a * b).sum();
    q.iter().zip(&logs).map(|(qj, lj)| qj * (lj - mean)).collect()
}

/// Loss value, gradients and features for a batch. No constraint is put on
/// the lambdas here; [`total_loss`] enforces that they sum to one.
pub fn backward(params: &ModelParams, batch: &[LossSample<'_>], spec: &LossSpec) -> Result<BatchOutcome> {
    if batch.is_empty() {
        return Err(Error::domain("empty batch"));
    }
    let k = params.num_classes();
    let n = batch.len() as f64;
    let mut grads = params.gradients();
    let mut cls = 0.0;
    let mut align = 0.0;
    let mut features = Vec::with_capacity(batch.len());
    for s in batch {
        if s.target.len() != k {
            return Err(Error::domain(format!(
                "target has {} entries, model has {k} classes",
                s.target.len()
            )));
        }
        let orig = params.forward(s.input)?;
        let weak = params.forward(s.weak)?;
        let strong = params.forward(s.strong)?;

        cls += s.weight * cross_entropy_unchecked(s.target, &orig.probabilities);
        align += s.weight * cross_entropy_unchecked(&weak.probabilities, &strong.probabilities);

        let c_cls = spec.lambda_cls * s.weight / n;
        if c_cls != 0.0 {
            let mut d = ce_grad_wrt_pred_logits(s.target, &orig.probabilities);
            d.iter_mut().for_each(|v| *v *= c_cls);
            params.backprop(&orig, &d, &mut grads);
        }
        let c_align = spec.lambda_align * s.weight / n;
        if c_align != 0.0 {
            let mut d = ce_grad_wrt_pred_logits(&weak.probabilities, &strong.probabilities);
            d.iter_mut().for_each(|v| *v *= c_align);
            params.backprop(&strong, &d, &mut grads);
            if !spec.stop_gradient {
                let mut d = ce_grad_wrt_target_logits(&weak.probabilities, &strong.probabilities);
                d.iter_mut().for_each(|v| *v *= c_align);
                params.backprop(&weak, &d, &mut grads);
            }
        }
        features.push(orig.feature().to_vec());
    }
    let classification = cls / n;
    let alignment = align / n;
    Ok(BatchOutcome {
        breakdown: LossBreakdown {
            classification,
            alignment,
            total: spec.lambda_cls * classification + spec.lambda_align * alignment,
            lambda_cls: spec.lambda_cls,
            lambda_align: spec.lambda_align,
        },
        grads,
        features,
    })
}

pub fn total_loss(params: &ModelParams, batch: &[LossSample<'_>], spec: &LossSpec) -> Result<BatchOutcome> {
    spec.validate()?;
    backward(params, batch, spec)
}
