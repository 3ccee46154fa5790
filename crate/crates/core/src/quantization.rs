//! Per-layer binary weights: the set of vectors whose entries inside each
//! layer share one magnitude `sᵢ ≥ 0` and differ only in sign.

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{ExtReal, Regularizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub offset: usize,
    pub len: usize,
}

impl Layer {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Partition of `0..dim` into contiguous layers, each with its own scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedSpace {
    layers: Vec<Layer>,
    dim: usize,
}

impl QuantizedSpace {
    /// Layers must be nonempty, contiguous and start at offset 0.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(StamError::arg("quantized space needs at least one layer"));
        }
        let mut next = 0;
        for (k, layer) in layers.iter().enumerate() {
            if layer.len == 0 {
                return Err(StamError::arg(format!("layer {k} is empty")));
            }
            if layer.offset != next {
                return Err(StamError::arg(format!(
                    "layer {k} starts at {} but the previous layer ends at {next}",
                    layer.offset
                )));
            }
            next += layer.len;
        }
        Ok(QuantizedSpace { layers, dim: next })
    }

    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        let mut offset = 0;
        let layers = lengths
            .iter()
            .map(|&len| {
                let layer = Layer { offset, len };
                offset += len;
                layer
            })
            .collect();
        QuantizedSpace::new(layers)
    }

    pub fn single(n: usize) -> Self {
        QuantizedSpace::from_lengths(&[n]).expect("layer length must be positive")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim
            && self.layers.iter().all(|layer| {
                let block = &w[layer.range()];
                let m = block[0].abs();
                block.iter().all(|v| v.abs() == m)
            })
    }
}

/// A point of Q kept both factored and dense.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPoint {
    pub scales: Vec<f64>,
    pub signs: Vec<i8>,
    pub dense: Vec<f64>,
}

/// Euclidean projection onto Q.
///
/// Per layer the minimizer of `‖s·Z − Uᵢ‖²` over `s ≥ 0`, `Z ∈ {±1}ⁿ` is
/// `Z = sign(Uᵢ)` and `s = ‖Uᵢ‖₁ / n`; zero entries take the sign `+1`.
///
/// # Panics
/// If `u.len()` differs from the dimension of `space`.
pub fn project_q(u: &[f64], space: &QuantizedSpace) -> QuantizedPoint {
    assert_eq!(u.len(), space.dim(), "vector length does not match quantized space");
    let mut scales = Vec::with_capacity(space.layers().len());
    let mut signs = vec![0i8; u.len()];
    let mut dense = vec![0.0; u.len()];
    for layer in space.layers() {
        let block = &u[layer.range()];
        let mut l1 = 0.0;
        for v in block {
            l1 += v.abs();
        }
        let s = l1 / layer.len as f64;
        scales.push(s);
        for j in layer.range() {
            let sign: i8 = if u[j] >= 0.0 { 1 } else { -1 };
            signs[j] = sign;
            dense[j] = s * f64::from(sign);
        }
    }
    QuantizedPoint {
        scales,
        signs,
        dense,
    }
}

/// `‖U − Proj_Q(U)‖₂`
pub fn distance_to_q(u: &[f64], space: &QuantizedSpace) -> f64 {
    linalg::dist(u, &project_q(u, space).dense)
}

/// `(λ·Proj_Q(U) + U) / (λ + 1)`
pub fn relaxed_blend(u: &[f64], space: &QuantizedSpace, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return Err(StamError::arg(format!("blend weight {lambda} must be ≥ 0")));
    }
    let proj = project_q(u, space);
    Ok(blend(u, &proj.dense, lambda))
}

pub(crate) fn blend(u: &[f64], target: &[f64], lambda: f64) -> Vec<f64> {
    u.iter()
        .zip(target)
        .map(|(uv, pv)| (lambda * pv + uv) / (lambda + 1.0))
        .collect()
}

/// Indicator of Q on the leading `space.dim()` coordinates; any trailing
/// coordinates (network biases, for instance) are unconstrained.
#[derive(Debug, Clone)]
pub struct QuantizedIndicator {
    space: QuantizedSpace,
    dim: usize,
}

impl QuantizedIndicator {
    pub fn new(space: QuantizedSpace, dim: usize) -> Result<Self> {
        if space.dim() > dim {
            return Err(StamError::arg(format!(
                "quantized space of dimension {} does not fit in {dim} coordinates",
                space.dim()
            )));
        }
        Ok(QuantizedIndicator { space, dim })
    }

    pub fn space(&self) -> &QuantizedSpace {
        &self.space
    }

    /// Projection of the full vector: quantized head, untouched tail.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("projected vector", self.dim, v.len())?;
        let head = self.space.dim();
        let mut out = project_q(&v[..head], &self.space).dense;
        out.extend_from_slice(&v[head..]);
        Ok(out)
    }
}

impl Regularizer for QuantizedIndicator {
    fn value(&self, x: &[f64]) -> ExtReal {
        if x.len() == self.dim && self.space.contains(&x[..self.space.dim()]) {
            ExtReal::Finite(0.0)
        } else {
            ExtReal::Infinity
        }
    }

    fn prox(&self, v: &[f64], _gamma: f64) -> Vec<f64> {
        self.project(v).expect("prox input length checked by the solver")
    }

    fn quantized_space(&self) -> Option<&QuantizedSpace> {
        Some(&self.space)
    }
}
