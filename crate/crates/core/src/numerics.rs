//! Dense double-precision kernels shared by every other module.
//!
//! All functions are pure and operate on slices. Probability vectors are plain
//! `Vec<f64>` whose entries lie in `[0, 1]` and sum to one.

use crate::error::{Error, Result};

/// Floor applied to probabilities before taking a logarithm.
pub const LOG_EPS: f64 = 1e-12;

/// Tolerance used when checking that a vector is a probability distribution.
pub const PROB_SUM_TOL: f64 = 1e-9;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Temperature softmax with max-subtraction.
pub fn softmax(z: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::config(format!(
            "softmax temperature must be positive, got {tau}"
        )));
    }
    if z.is_empty() {
        return Err(Error::domain("softmax of an empty vector"));
    }
    Ok(softmax_unchecked(z, tau))
}

pub(crate) fn softmax_unchecked(z: &[f64], tau: f64) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|&v| ((v - max) / tau).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// `a·b / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "cosine similarity of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::domain("cosine similarity with a zero-norm vector"));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `-Σ target_k · ln(max(pred_k, ε))`.
pub fn cross_entropy(target: &[f64], pred: &[f64]) -> Result<f64> {
    if target.len() != pred.len() {
        return Err(Error::domain(format!(
            "cross entropy of vectors with lengths {} and {}",
            target.len(),
            pred.len()
        )));
    }
    Ok(cross_entropy_unchecked(target, pred))
}

pub(crate) fn cross_entropy_unchecked(target: &[f64], pred: &[f64]) -> f64 {
    let ce: f64 = target
        .iter()
        .zip(pred)
        .filter(|(t, _)| **t != 0.0)
        .map(|(t, p)| -t * p.max(LOG_EPS).ln())
        .sum();
    // -0.0 from a perfect match reads badly in logs
    ce.max(0.0)
}

/// Index of the maximum entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

pub fn one_hot(k: usize, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    v
}

pub fn one_hot_argmax(v: &[f64]) -> Result<Vec<f64>> {
    let k = argmax(v).ok_or_else(|| Error::domain("argmax of an empty vector"))?;
    Ok(one_hot(k, v.len()))
}

pub fn is_prob_vec(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| (0.0..=1.0).contains(x)) && (v.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOL
}

/// Upper bound on any softmax entry when inputs are cosine similarities:
/// one entry at +1, every other at -1.
pub fn max_similarity_posterior(num_classes: usize, tau: f64) -> f64 {
    let others = (num_classes.saturating_sub(1)) as f64;
    1.0 / (1.0 + others * (-2.0 / tau).exp())
}
