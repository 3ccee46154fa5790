use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, StamError};
use crate::model::{FiniteSum, ProblemInstance, QuadraticCoupling, SmoothnessProfile};
use crate::problems::data::{Dataset, Labels};
use crate::problems::NonsmoothTerm;
use crate::quantization::QuantizedSpace;
use crate::sampling::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SoftmaxCrossEntropy,
    SquaredError,
}

/// Fully connected network. Parameters are flattened as every weight matrix
/// (row-major, `out × in`) in layer order, followed by every bias vector.
/// Only the weight block is quantized, one scale per matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, activation: Activation, loss: Loss) -> Result<Self> {
        if layer_widths.len() < 2 || layer_widths.contains(&0) {
            return Err(StamError::arg(format!(
                "layer widths {layer_widths:?} need at least two positive entries"
            )));
        }
        Ok(MlpSpec {
            layer_widths,
            activation,
            loss,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    fn weight_lengths(&self) -> Vec<usize> {
        self.layer_widths.windows(2).map(|w| w[0] * w[1]).collect()
    }

    pub fn n_weights(&self) -> usize {
        self.weight_lengths().iter().sum()
    }

    pub fn n_params(&self) -> usize {
        self.n_weights() + self.layer_widths[1..].iter().sum::<usize>()
    }

    /// One layer per weight matrix; biases are outside Q.
    pub fn quant_space(&self) -> QuantizedSpace {
        QuantizedSpace::from_lengths(&self.weight_lengths())
            .expect("positive widths give nonempty layers")
    }

    /// Offsets of (weights, biases) of layer `k`.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut w_off = 0;
        let mut b_off = self.n_weights();
        self.layer_widths
            .windows(2)
            .map(|w| {
                let o = (w_off, b_off);
                w_off += w[0] * w[1];
                b_off += w[1];
                o
            })
            .collect()
    }

    /// He-normal weights times `scale`, zero biases.
    pub fn init_params(&self, scale: f64, rng: &mut RngStream) -> Vec<f64> {
        let mut params = vec![0.0; self.n_params()];
        for (k, (w_off, _)) in self.offsets().into_iter().enumerate() {
            let fan_in = self.layer_widths[k];
            let n = fan_in * self.layer_widths[k + 1];
            let std = scale * (2.0 / fan_in as f64).sqrt();
            for p in &mut params[w_off..w_off + n] {
                let e: f64 = StandardNormal.sample(rng.rng());
                *p = std * e;
            }
        }
        params
    }

    /// Pre-activations and activations of every layer; the last entry of
    /// `acts` holds the raw network output.
    fn forward(&self, params: &[f64], input: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let offsets = self.offsets();
        let mut acts = vec![input.to_vec()];
        let mut pre = Vec::with_capacity(self.n_layers());
        for (k, &(w_off, b_off)) in offsets.iter().enumerate() {
            let (n_in, n_out) = (self.layer_widths[k], self.layer_widths[k + 1]);
            let a = &acts[k];
            let z: Vec<f64> = (0..n_out)
                .map(|r| {
                    let row = &params[w_off + r * n_in..w_off + (r + 1) * n_in];
                    params[b_off + r] + row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>()
                })
                .collect();
            let out = if k + 1 == offsets.len() {
                z.clone()
            } else {
                match self.activation {
                    Activation::Relu => z.iter().map(|&v| v.max(0.0)).collect(),
                }
            };
            pre.push(z);
            acts.push(out);
        }
        (pre, acts)
    }

    pub fn output(&self, params: &[f64], input: &[f64]) -> Vec<f64> {
        self.forward(params, input).1.pop().unwrap()
    }

    pub fn predict(&self, params: &[f64], input: &[f64]) -> usize {
        let out = self.output(params, input);
        // first maximum wins on ties
        let mut best = 0;
        for (j, &v) in out.iter().enumerate() {
            if v > out[best] {
                best = j;
            }
        }
        best
    }

    /// Fraction of correctly classified examples; `None` for regression data.
    pub fn accuracy(&self, params: &[f64], data: &Dataset) -> Option<f64> {
        match &data.labels {
            Labels::Classes { ids, .. } => {
                let hits = data
                    .features
                    .iter()
                    .zip(ids)
                    .filter(|(p, &q)| self.predict(params, p) == q)
                    .count();
                Some(hits as f64 / data.len() as f64)
            }
            Labels::Targets(_) => None,
        }
    }

    /// Loss and output-layer error `∂loss/∂output`.
    fn loss_and_delta(&self, out: &[f64], target: Target<'_>) -> (f64, Vec<f64>) {
        match self.loss {
            Loss::SoftmaxCrossEntropy => {
                let m = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = out.iter().map(|v| (v - m).exp()).sum();
                let log_z = m + sum.ln();
                let mut delta: Vec<f64> = out.iter().map(|v| (v - log_z).exp()).collect();
                let loss = match target {
                    Target::Class(c) => {
                        delta[c] -= 1.0;
                        log_z - out[c]
                    }
                    Target::Values(q) => {
                        // soft labels: −Σ q log softmax
                        let mut l = 0.0;
                        for j in 0..out.len() {
                            l -= q[j] * (out[j] - log_z);
                            delta[j] = delta[j] * q.iter().sum::<f64>() - q[j];
                        }
                        l
                    }
                };
                (loss, delta)
            }
            Loss::SquaredError => {
                let delta: Vec<f64> = match target {
                    Target::Class(c) => out
                        .iter()
                        .enumerate()
                        .map(|(j, v)| v - if j == c { 1.0 } else { 0.0 })
                        .collect(),
                    Target::Values(q) => out.iter().zip(q).map(|(v, t)| v - t).collect(),
                };
                (0.5 * delta.iter().map(|d| d * d).sum::<f64>(), delta)
            }
        }
    }

    fn loss(&self, params: &[f64], input: &[f64], target: Target<'_>) -> f64 {
        self.loss_and_delta(&self.output(params, input), target).0
    }

    /// Adds `weight · ∇ loss` to `out` by backpropagation.
    fn add_gradient(&self, params: &[f64], input: &[f64], target: Target<'_>, weight: f64, out: &mut [f64]) {
        let (pre, acts) = self.forward(params, input);
        let (_, mut delta) = self.loss_and_delta(acts.last().unwrap(), target);
        let offsets = self.offsets();
        for k in (0..self.n_layers()).rev() {
            let (w_off, b_off) = offsets[k];
            let (n_in, n_out) = (self.layer_widths[k], self.layer_widths[k + 1]);
            let a = &acts[k];
            for r in 0..n_out {
                let d = weight * delta[r];
                out[b_off + r] += d;
                for (o, v) in out[w_off + r * n_in..w_off + (r + 1) * n_in].iter_mut().zip(a) {
                    *o += d * v;
                }
            }
            if k == 0 {
                break;
            }
            let mut next = vec![0.0; n_in];
            for r in 0..n_out {
                let row = &params[w_off + r * n_in..w_off + (r + 1) * n_in];
                for (nj, w) in next.iter_mut().zip(row) {
                    *nj += w * delta[r];
                }
            }
            match self.activation {
                Activation::Relu => {
                    for (nj, &z) in next.iter_mut().zip(&pre[k - 1]) {
                        if z <= 0.0 {
                            *nj = 0.0;
                        }
                    }
                }
            }
            delta = next;
        }
    }
}

#[derive(Clone, Copy)]
enum Target<'a> {
    Class(usize),
    Values(&'a [f64]),
}

/// Mean per-example loss of an [`MlpSpec`] network over a dataset.
#[derive(Debug, Clone)]
pub struct MlpModel {
    spec: MlpSpec,
    data: Dataset,
}

impl MlpModel {
    pub fn new(spec: MlpSpec, data: Dataset) -> Result<Self> {
        check_len("input width", spec.input_dim(), data.dim())?;
        match &data.labels {
            Labels::Classes { n_classes, .. } => {
                check_len("output width", spec.output_dim(), *n_classes)?;
            }
            Labels::Targets(t) => {
                for row in t {
                    check_len("target width", spec.output_dim(), row.len())?;
                }
            }
        }
        Ok(MlpModel { spec, data })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    fn target(&self, i: usize) -> Target<'_> {
        match &self.data.labels {
            Labels::Classes { ids, .. } => Target::Class(ids[i]),
            Labels::Targets(t) => Target::Values(&t[i]),
        }
    }
}

impl FiniteSum for MlpModel {
    fn n_components(&self) -> usize {
        self.data.len()
    }

    fn dim(&self) -> usize {
        self.spec.n_params()
    }

    fn component_value(&self, i: usize, y: &[f64]) -> f64 {
        self.spec.loss(y, &self.data.features[i], self.target(i))
    }

    fn add_component_gradient(&self, i: usize, y: &[f64], weight: f64, out: &mut [f64]) {
        self.spec
            .add_gradient(y, &self.data.features[i], self.target(i), weight, out);
    }
}

/// Training problem `λ/2 ‖W − W̃‖² + mean loss + I_Q(W̃)`. `L1` is not known
/// analytically; `declared_l1` is stored and flagged as an estimate. All
/// infima are 0 since both losses are nonnegative.
pub fn make_mlp_problem(
    spec: MlpSpec,
    data: Dataset,
    lambda: f64,
    declared_l1: f64,
    quantize: bool,
) -> Result<ProblemInstance> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(StamError::arg(format!("coupling weight {lambda} must be ≥ 0")));
    }
    if !(declared_l1 > 0.0 && declared_l1.is_finite()) {
        return Err(StamError::arg(format!("declared L1 {declared_l1} must be positive")));
    }
    let n = data.len();
    let dim = spec.n_params();
    let nonsmooth = if quantize {
        NonsmoothTerm::Quantized(spec.quant_space())
    } else {
        NonsmoothTerm::Zero
    };
    let model = MlpModel::new(spec, data)?;
    let mut smoothness =
        SmoothnessProfile::with_quadratic_coupling(declared_l1, vec![declared_l1; n], lambda, 0.0, vec![0.0; n]);
    smoothness.l1_analytic = false;
    ProblemInstance::new(
        Arc::new(model),
        Arc::new(QuadraticCoupling { lambda }),
        nonsmooth.build(dim)?,
        dim,
        smoothness,
    )
}
