//! The classifier: a rectifier perceptron encoder followed by a linear head.
//!
//! Parameters live in one flat buffer so the optimizer, the EMA shadow and the
//! checkpoint format can treat them uniformly. Layer `l` occupies
//! `out_l * in_l` weights (row-major, one row per output unit) followed by
//! `out_l` biases.

mod adam;
mod checkpoint;
mod ema;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::Checkpoint;
pub use ema::EmaParams;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, softmax_unchecked};

/// Default encoder widths.
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 32];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// `[input, hidden.., classes]`
    dims: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct LayerSpan {
    inputs: usize,
    outputs: usize,
    weights: usize,
    biases: usize,
}

impl ModelParams {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::domain(format!("invalid layer widths {dims:?}")));
        }
        let len = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        })
    }

    /// Symmetric uniform weights with a fan-in scaled limit, zero biases.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut params = Self::zeros(dims)?;
        let last = params.num_layers() - 1;
        for l in 0..params.num_layers() {
            let span = params.span(l);
            let gain = if l == last { 1.0 } else { 6.0 };
            let limit = (gain / span.inputs as f64).sqrt();
            for w in &mut params.data[span.weights..span.weights + span.inputs * span.outputs] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(params)
    }

    pub fn from_flat(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        let mut params = Self::zeros(dims)?;
        if params.data.len() != data.len() {
            return Err(Error::domain(format!(
                "layer widths {dims:?} need {} parameters, got {}",
                params.data.len(),
                data.len()
            )));
        }
        params.data = data;
        Ok(params)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn feature_dim(&self) -> usize {
        self.dims[self.dims.len() - 2]
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &ModelParams) -> bool {
        self.dims == other.dims
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Multiplies the final linear layer (weights and biases) by `c`.
    pub fn scale_head(&mut self, c: f64) {
        let span = self.span(self.num_layers() - 1);
        let end = span.biases + span.outputs;
        for v in &mut self.data[span.weights..end] {
            *v *= c;
        }
    }

    fn span(&self, layer: usize) -> LayerSpan {
        let mut offset = 0;
        for l in 0..layer {
            offset += self.dims[l] * self.dims[l + 1] + self.dims[l + 1];
        }
        let inputs = self.dims[layer];
        let outputs = self.dims[layer + 1];
        LayerSpan {
            inputs,
            outputs,
            weights: offset,
            biases: offset + inputs * outputs,
        }
    }

    /// Weight matrix row `unit` of `layer`, followed by its bias.
    pub fn weight(&self, layer: usize, unit: usize, input: usize) -> f64 {
        let s = self.span(layer);
        self.data[s.weights + unit * s.inputs + input]
    }

    pub fn bias(&self, layer: usize, unit: usize) -> f64 {
        let s = self.span(layer);
        self.data[s.biases + unit]
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardRecord> {
        if x.len() != self.input_dim() {
            return Err(Error::domain(format!(
                "input has {} values, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> ForwardRecord {
        let layers = self.num_layers();
        let mut pre = Vec::with_capacity(layers);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(layers - 1);
        for l in 0..layers {
            let s = self.span(l);
            let input = if l == 0 { x } else { &post[l - 1] };
            let z: Vec<f64> = (0..s.outputs)
                .map(|j| {
                    let row = &self.data[s.weights + j * s.inputs..s.weights + (j + 1) * s.inputs];
                    dot(row, input) + self.data[s.biases + j]
                })
                .collect();
            if l + 1 < layers {
                post.push(z.iter().map(|&v| v.max(0.0)).collect());
            }
            pre.push(z);
        }
        let logits = pre.last().unwrap().clone();
        let probabilities = softmax_unchecked(&logits, 1.0);
        ForwardRecord {
            input: x.to_vec(),
            pre,
            post,
            logits,
            probabilities,
        }
    }

    /// Accumulates `∂L/∂params` into `grads` given `∂L/∂logits` for one
    /// recorded forward pass.
    pub fn backprop(&self, record: &ForwardRecord, dlogits: &[f64], grads: &mut Gradients) {
        debug_assert_eq!(grads.0.len(), self.data.len());
        let layers = self.num_layers();
        let mut delta = dlogits.to_vec();
        for l in (0..layers).rev() {
            let s = self.span(l);
            let input: &[f64] = if l == 0 { &record.input } else { &record.post[l - 1] };
            for (j, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut grads.0[s.weights + j * s.inputs..s.weights + (j + 1) * s.inputs];
                for (g, &a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                grads.0[s.biases + j] += d;
            }
            if l == 0 {
                break;
            }
            let below = &record.pre[l - 1];
            let mut next = vec![0.0; s.inputs];
            for (j, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &self.data[s.weights + j * s.inputs..s.weights + (j + 1) * s.inputs];
                for (n, &w) in next.iter_mut().zip(row) {
                    *n += d * w;
                }
            }
            for (n, &z) in next.iter_mut().zip(below) {
                if z <= 0.0 {
                    *n = 0.0;
                }
            }
            delta = next;
        }
    }

    pub fn gradients(&self) -> Gradients {
        Gradients(vec![0.0; self.data.len()])
    }
}

/// Everything a forward pass produced, kept for backprop and for the
/// prototype and neighbour classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardRecord {
    pub input: Vec<f64>,
    /// Pre-activation of every layer; the last entry is the logits.
    pub pre: Vec<Vec<f64>>,
    /// Rectified activation of every hidden layer.
    pub post: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ForwardRecord {
    /// Last hidden activation, the encoder output.
    pub fn feature(&self) -> &[f64] {
        self.post.last().map(Vec::as_slice).unwrap_or(&self.input)
    }
}

/// Gradient buffer laid out like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

impl Gradients {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in &mut self.0 {
            *a *= c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}
