//! Diagonal-Gaussian posterior over a fully-connected network.
//!
//! Weights are flattened layer by layer; within a layer the weight matrix
//! comes first in row-major order, followed by the bias vector. Every
//! weight-space box ([`IntervalBox`]) and every [`WeightSample`] uses this
//! layout, so dimension `j` of a box always refers to the same scalar.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::interval::{Interval, IntervalBox, IntervalMatrix};

/// Pointwise activation. All kinds are non-decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl ActivationKind {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ActivationKind::Relu => v.max(0.0),
            ActivationKind::Tanh => v.tanh(),
            ActivationKind::Sigmoid => sigmoid(v),
            ActivationKind::Identity => v,
        }
    }

    /// Derivative; for ReLU the right derivative is used at 0.
    pub fn derivative(self, v: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Tanh => {
                let t = v.tanh();
                1.0 - t * t
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(v);
                s * (1.0 - s)
            }
            ActivationKind::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Identity => "identity",
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Posterior of one dense layer `zeta = W z + b`, followed by `activation`.
///
/// Matrices are stored row-major with `outputs` rows and `inputs` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPosterior {
    inputs: usize,
    outputs: usize,
    weight_mean: Vec<f64>,
    weight_var: Vec<f64>,
    bias_mean: Vec<f64>,
    bias_var: Vec<f64>,
    activation: ActivationKind,
}

impl LayerPosterior {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weight_mean: Vec<f64>,
        weight_var: Vec<f64>,
        bias_mean: Vec<f64>,
        bias_var: Vec<f64>,
        activation: ActivationKind,
    ) -> Result<Self> {
        let expect = |what: &str, want: usize, got: usize| {
            if want == got {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "{what} has {got} entries, expected {want}"
                )))
            }
        };
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidModel("layer with zero width".into()));
        }
        expect("weight mean", inputs * outputs, weight_mean.len())?;
        expect("weight variance", inputs * outputs, weight_var.len())?;
        expect("bias mean", outputs, bias_mean.len())?;
        expect("bias variance", outputs, bias_var.len())?;
        for (what, vals) in [("weight mean", &weight_mean), ("bias mean", &bias_mean)] {
            if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("{what}[{k}] is not finite")));
            }
        }
        for (what, vals) in [("weight variance", &weight_var), ("bias variance", &bias_var)] {
            if let Some(k) = vals.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidModel(format!(
                    "{what}[{k}] = {} is not a finite non-negative number",
                    vals[k]
                )));
            }
        }
        Ok(Self {
            inputs,
            outputs,
            weight_mean,
            weight_var,
            bias_mean,
            bias_var,
            activation,
        })
    }

    /// A layer with zero variance everywhere.
    pub fn deterministic(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: ActivationKind,
    ) -> Result<Self> {
        let wv = vec![0.0; weights.len()];
        let bv = vec![0.0; biases.len()];
        Self::new(inputs, outputs, weights, wv, biases, bv, activation)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight_mean(&self) -> &[f64] {
        &self.weight_mean
    }

    pub fn weight_var(&self) -> &[f64] {
        &self.weight_var
    }

    pub fn bias_mean(&self) -> &[f64] {
        &self.bias_mean
    }

    pub fn bias_var(&self) -> &[f64] {
        &self.bias_var
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    /// Number of scalars (weights plus biases) in this layer.
    pub fn num_params(&self) -> usize {
        self.outputs * (self.inputs + 1)
    }
}

/// Posterior over a network with `K >= 1` hidden layers and an identity
/// output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BnnModel {
    input_dim: usize,
    layers: Vec<LayerPosterior>,
    offsets: Vec<usize>,
}

impl BnnModel {
    pub fn new(input_dim: usize, layers: Vec<LayerPosterior>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least one hidden layer and an output layer, got {} layer(s)",
                layers.len()
            )));
        }
        let mut width = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            if layer.inputs != width {
                return Err(Error::InvalidModel(format!(
                    "layer {k} expects {} inputs but the previous layer produces {width}",
                    layer.inputs
                )));
            }
            width = layer.outputs;
        }
        let last = layers.len() - 1;
        if layers[last].activation != ActivationKind::Identity {
            return Err(Error::InvalidModel(format!(
                "output layer {last} must use the identity activation, found {}",
                layers[last].activation.name()
            )));
        }
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut acc = 0;
        for layer in &layers {
            offsets.push(acc);
            acc += layer.num_params();
        }
        offsets.push(acc);
        Ok(Self {
            input_dim,
            layers,
            offsets,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn layers(&self) -> &[LayerPosterior] {
        &self.layers
    }

    /// Number of hidden layers `K`.
    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// Total number of scalars in the flattened weight vector.
    pub fn num_weights(&self) -> usize {
        self.offsets[self.layers.len()]
    }

    /// Flat index of the first weight of layer `k`.
    pub fn weight_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Flat index of the first bias of layer `k`.
    pub fn bias_offset(&self, k: usize) -> usize {
        self.offsets[k] + self.layers[k].inputs * self.layers[k].outputs
    }

    /// Flattened posterior means.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_weights());
        for l in &self.layers {
            out.extend_from_slice(&l.weight_mean);
            out.extend_from_slice(&l.bias_mean);
        }
        out
    }

    /// Flattened posterior variances (the diagonal of the covariance).
    pub fn variance_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_weights());
        for l in &self.layers {
            out.extend_from_slice(&l.weight_var);
            out.extend_from_slice(&l.bias_var);
        }
        out
    }

    /// The network whose weights are the posterior means.
    pub fn mean_sample(&self) -> WeightSample {
        WeightSample {
            values: self.mean_vector(),
        }
    }

    /// Splits a weight-space box into per-layer weight and bias intervals.
    pub fn layer_intervals(&self, h: &IntervalBox) -> Result<Vec<LayerIntervals>> {
        check_dim("weight box", self.num_weights(), h.dim())?;
        let iv = h.intervals();
        self.layers
            .iter()
            .enumerate()
            .map(|(k, layer)| {
                let w0 = self.weight_offset(k);
                let b0 = self.bias_offset(k);
                let weights = IntervalMatrix::new(
                    layer.outputs,
                    layer.inputs,
                    iv[w0..b0].to_vec(),
                )?;
                let biases = iv[b0..b0 + layer.outputs].to_vec();
                Ok(LayerIntervals { weights, biases })
            })
            .collect()
    }

    /// Replaces every mean and variance; used to build a Gaussian surrogate
    /// with the same architecture.
    pub fn with_moments(&self, mean: &[f64], var: &[f64]) -> Result<BnnModel> {
        check_dim("mean vector", self.num_weights(), mean.len())?;
        check_dim("variance vector", self.num_weights(), var.len())?;
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let w0 = self.weight_offset(k);
                let b0 = self.bias_offset(k);
                let end = b0 + l.outputs;
                LayerPosterior::new(
                    l.inputs,
                    l.outputs,
                    mean[w0..b0].to_vec(),
                    var[w0..b0].to_vec(),
                    mean[b0..end].to_vec(),
                    var[b0..end].to_vec(),
                    l.activation,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        BnnModel::new(self.input_dim, layers)
    }
}

/// Interval bounds on one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerIntervals {
    pub weights: IntervalMatrix,
    pub biases: Vec<Interval>,
}

/// A point in weight space, flattened in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightSample {
    values: Vec<f64>,
}

impl WeightSample {
    pub fn new(model: &BnnModel, values: Vec<f64>) -> Result<Self> {
        check_dim("weight sample", model.num_weights(), values.len())?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Zero-width weight box at this sample.
    pub fn as_box(&self) -> IntervalBox {
        IntervalBox::point(&self.values)
    }
}

/// Evaluates the network with weights `w` at input `x`.
pub fn forward(model: &BnnModel, w: &WeightSample, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("input", model.input_dim, x.len())?;
    check_dim("weight sample", model.num_weights(), w.len())?;
    let mut z = x.to_vec();
    for (k, layer) in model.layers.iter().enumerate() {
        let wk = &w.values[model.weight_offset(k)..model.bias_offset(k)];
        let bk = &w.values[model.bias_offset(k)..model.bias_offset(k) + layer.outputs];
        z = (0..layer.outputs)
            .map(|i| {
                let row = &wk[i * layer.inputs..(i + 1) * layer.inputs];
                let pre = row.iter().zip(&z).fold(0.0, |acc, (a, b)| acc + a * b) + bk[i];
                layer.activation.apply(pre)
            })
            .collect();
    }
    Ok(z)
}

/// Draws one weight vector from the posterior using stream 0 of `seed`.
pub fn sample_weights(model: &BnnModel, seed: u64) -> WeightSample {
    sample_weights_stream(model, seed, 0)
}

/// Draws the `stream`-th weight vector of the seed sequence.
///
/// Each `(seed, stream)` pair owns an independent ChaCha stream, so sample `i`
/// does not depend on how many other samples were drawn or in which order.
pub fn sample_weights_stream(model: &BnnModel, seed: u64, stream: u64) -> WeightSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut values = Vec::with_capacity(model.num_weights());
    for layer in &model.layers {
        for (m, v) in layer
            .weight_mean
            .iter()
            .zip(&layer.weight_var)
            .chain(layer.bias_mean.iter().zip(&layer.bias_var))
        {
            let eps: f64 = StandardNormal.sample(&mut rng);
            values.push(if *v == 0.0 { *m } else { m + v.sqrt() * eps });
        }
    }
    WeightSample { values }
}

/// How the weight margin scales the half-width of a candidate rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginSemantics {
    /// Half-width `gamma * sqrt(var)`.
    #[default]
    Stddev,
    /// Half-width `gamma * var`.
    Variance,
}

/// Candidate weight rectangle `[w - gamma * s, w + gamma * s]` around a sample.
pub fn weight_rectangle(
    model: &BnnModel,
    w: &WeightSample,
    gamma: f64,
    semantics: MarginSemantics,
) -> Result<IntervalBox> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weight margin must be finite and non-negative, got {gamma}"
        )));
    }
    check_dim("weight sample", model.num_weights(), w.len())?;
    Ok(w
        .values
        .iter()
        .zip(model.variance_vector())
        .map(|(&c, var)| {
            let scale = match semantics {
                MarginSemantics::Stddev => var.sqrt(),
                MarginSemantics::Variance => var,
            };
            if var == 0.0 {
                Interval::point(c)
            } else {
                Interval::centered(c, gamma * scale)
            }
        })
        .collect())
}
