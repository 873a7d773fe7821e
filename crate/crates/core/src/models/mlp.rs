//! Softmax classifier over a fully connected network with hand-derived
//! backward pass.
//!
//! Parameter flattening contract (frozen; run records depend on it):
//! layers in order from input to output, each layer's weight matrix before
//! its bias vector, weight matrices stored row-major with shape
//! (fan_out, fan_in). W[i][j] multiplies input feature j into output unit i.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{check_dims, Error, Result};
use crate::objective::Objective;
use crate::vector::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

/// Architecture of the classifier: layer sizes and hidden activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(
        input_dim: usize,
        hidden: Vec<usize>,
        classes: usize,
        activation: Activation,
    ) -> Result<Self> {
        if input_dim == 0 || classes == 0 || hidden.iter().any(|&h| h == 0) {
            return Err(Error::Config("all layer sizes must be positive".into()));
        }
        Ok(Self { input_dim, hidden, classes, activation })
    }

    /// Layer sizes from input to output:
    /// [input_dim, hidden..., classes].
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden);
        dims.push(self.classes);
        dims
    }

    /// Total parameter count: Σ (fan_out·fan_in + fan_out) over layers.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .windows(2)
            .map(|w| w[1] * w[0] + w[1])
            .sum()
    }

    /// Seeded uniform(−s, s) initialization with s = √(6/(fan_in+fan_out))
    /// per layer, applied to weights and biases alike, in the frozen
    /// flattening order.
    pub fn init_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(self.param_count());
        for w in self.layer_dims().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_out * fan_in + fan_out {
                values.push(rng.gen_range(-s..s));
            }
        }
        ParamVector::new(values).expect("uniform init is finite")
    }
}

/// Cross-entropy objective: L(θ) = −(1/|B|)·Σ log p(yᵢ|xᵢ,θ) with a softmax
/// output layer. Log-probabilities use max-subtraction, so the loss is finite
/// for any finite logits. Bounded below by zero.
pub struct MlpClassifier {
    spec: MlpSpec,
    data: Arc<Dataset>,
}

/// Builds the classifier objective over `dataset`.
pub fn mlp_classifier(spec: MlpSpec, dataset: Arc<Dataset>) -> Result<MlpClassifier> {
    if dataset.feature_dim() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.input_dim,
            actual: dataset.feature_dim(),
        });
    }
    if dataset.class_count > spec.classes {
        return Err(Error::Config(format!(
            "dataset has {} classes but the model outputs {}",
            dataset.class_count, spec.classes
        )));
    }
    Ok(MlpClassifier { spec, data: dataset })
}

/// Forward-pass scratch: per-layer pre-activations are not kept, only the
/// activations (for tanh the derivative is recoverable from the output).
struct Forward {
    activations: Vec<Array2<f64>>,
    log_probs: Array2<f64>,
}

impl MlpClassifier {
    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    fn weight_views<'a>(&self, theta: &'a ParamVector) -> Vec<(ArrayView2<'a, f64>, &'a [f64])> {
        let dims = self.spec.layer_dims();
        let flat = theta.as_slice();
        let mut views = Vec::with_capacity(dims.len() - 1);
        let mut offset = 0;
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = ArrayView2::from_shape((fan_out, fan_in), &flat[offset..offset + fan_out * fan_in])
                .expect("layout matches offsets");
            offset += fan_out * fan_in;
            let bias = &flat[offset..offset + fan_out];
            offset += fan_out;
            views.push((weights, bias));
        }
        views
    }

    fn gather(&self, batch: Option<&[usize]>) -> Result<(Array2<f64>, Vec<usize>)> {
        match batch {
            None => Ok((self.data.features.clone(), self.data.labels.clone())),
            Some(idx) => {
                if idx.is_empty() {
                    return Err(Error::Config("empty batch".into()));
                }
                if let Some(&bad) = idx.iter().find(|&&i| i >= self.data.len()) {
                    return Err(Error::Config(format!("batch index {bad} out of range")));
                }
                let features = self.data.features.select(Axis(0), idx);
                let labels = idx.iter().map(|&i| self.data.labels[i]).collect();
                Ok((features, labels))
            }
        }
    }

    fn forward(&self, theta: &ParamVector, inputs: Array2<f64>) -> Forward {
        let layers = self.weight_views(theta);
        let mut activations = vec![inputs];
        let last = layers.len() - 1;
        let mut logits = None;
        for (l, (weights, bias)) in layers.iter().enumerate() {
            let bias = Array1::from_iter(bias.iter().copied());
            let mut z = activations.last().unwrap().dot(&weights.t()) + &bias;
            if l < last {
                match self.spec.activation {
                    Activation::Tanh => z.mapv_inplace(f64::tanh),
                    Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
                }
                activations.push(z);
            } else {
                logits = Some(z);
            }
        }
        let mut log_probs = logits.expect("at least one layer");
        for mut row in log_probs.rows_mut() {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|v| v - max);
            let lse = row.iter().map(|v| v.exp()).sum::<f64>().ln();
            row.mapv_inplace(|v| v - lse);
        }
        Forward { activations, log_probs }
    }

    fn nll(&self, fwd: &Forward, labels: &[usize]) -> f64 {
        let n = labels.len() as f64;
        -labels
            .iter()
            .enumerate()
            .map(|(i, &y)| fwd.log_probs[[i, y]])
            .sum::<f64>()
            / n
    }

    /// Top-1 accuracy of the model at `theta` on any dataset with matching
    /// feature dimension (typically the held-out test set).
    pub fn accuracy_on(&self, theta: &ParamVector, dataset: &Dataset) -> Result<f64> {
        check_dims(self.dim(), theta.dim())?;
        if dataset.feature_dim() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                actual: dataset.feature_dim(),
            });
        }
        if dataset.is_empty() {
            return Err(Error::Config("cannot score an empty dataset".into()));
        }
        let layers = self.weight_views(theta);
        let mut activations = dataset.features.clone();
        let last = layers.len() - 1;
        for (l, (weights, bias)) in layers.iter().enumerate() {
            let bias = Array1::from_iter(bias.iter().copied());
            let mut z = activations.dot(&weights.t()) + &bias;
            if l < last {
                match self.spec.activation {
                    Activation::Tanh => z.mapv_inplace(f64::tanh),
                    Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
                }
            }
            activations = z;
        }
        let hits = activations
            .rows()
            .into_iter()
            .zip(&dataset.labels)
            .filter(|(row, &y)| {
                let best = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                best == y
            })
            .count();
        Ok(hits as f64 / dataset.len() as f64)
    }
}

impl Objective for MlpClassifier {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.data.len())
    }

    fn loss(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<f64> {
        check_dims(self.dim(), theta.dim())?;
        let (inputs, labels) = self.gather(batch)?;
        let fwd = self.forward(theta, inputs);
        Ok(self.nll(&fwd, &labels))
    }

    fn grad(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<ParamVector> {
        Ok(self.loss_grad(theta, batch)?.1)
    }

    fn loss_grad(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<(f64, ParamVector)> {
        check_dims(self.dim(), theta.dim())?;
        let (inputs, labels) = self.gather(batch)?;
        let batch_n = labels.len() as f64;
        let fwd = self.forward(theta, inputs);
        let loss = self.nll(&fwd, &labels);

        // dL/dlogits = (softmax − onehot) / batch_n
        let mut delta = fwd.log_probs.mapv(f64::exp);
        for (i, &y) in labels.iter().enumerate() {
            delta[[i, y]] -= 1.0;
        }
        delta /= batch_n;

        let layers = self.weight_views(theta);
        let dims = self.spec.layer_dims();
        let mut grad = vec![0.0; self.dim()];

        // Per-layer flat offsets, mirroring weight_views.
        let mut offsets = Vec::with_capacity(layers.len());
        let mut off = 0;
        for w in dims.windows(2) {
            offsets.push(off);
            off += w[1] * w[0] + w[1];
        }

        for l in (0..layers.len()).rev() {
            let input = &fwd.activations[l];
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let dw = delta.t().dot(input);
            let db = delta.sum_axis(Axis(0));
            let at = offsets[l];
            grad[at..at + fan_out * fan_in].copy_from_slice(dw.as_standard_layout().as_slice().unwrap());
            grad[at + fan_out * fan_in..at + fan_out * fan_in + fan_out]
                .copy_from_slice(db.as_slice().unwrap());

            if l > 0 {
                let d_act = delta.dot(&layers[l].0);
                // The stored activation is the layer output, so tanh' and
                // relu' are both recoverable from it.
                delta = match self.spec.activation {
                    Activation::Tanh => d_act * input.mapv(|a| 1.0 - a * a),
                    Activation::Relu => d_act * input.mapv(|a| if a > 0.0 { 1.0 } else { 0.0 }),
                };
            }
        }

        Ok((loss, ParamVector::new(grad)?))
    }
}
