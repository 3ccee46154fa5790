use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{FiniteSum, ProblemInstance, QuadraticCoupling, SmoothnessProfile};
use crate::problems::NonsmoothTerm;
use crate::sampling::RngStream;

/// `Gᵢ(y) = log(1 + exp(−cᵢ aᵢᵀy))` with `cᵢ ∈ {−1, +1}`.
#[derive(Debug, Clone)]
pub struct Logistic {
    rows: Vec<Vec<f64>>,
    signs: Vec<f64>,
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl FiniteSum for Logistic {
    fn n_components(&self) -> usize {
        self.rows.len()
    }

    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn component_value(&self, i: usize, y: &[f64]) -> f64 {
        softplus(-self.signs[i] * linalg::dot(&self.rows[i], y))
    }

    fn add_component_gradient(&self, i: usize, y: &[f64], weight: f64, out: &mut [f64]) {
        let a = &self.rows[i];
        let c = self.signs[i];
        let margin = c * linalg::dot(a, y);
        let coef = -weight * c * sigmoid(-margin);
        for (o, aj) in out.iter_mut().zip(a) {
            *o += coef * aj;
        }
    }
}

impl Logistic {
    /// `L1ⁱ = ‖aᵢ‖²/4`, `L1 = λ_max(AᵀA/4N)`. The infima are set to the valid
    /// lower bound 0 (the loss is nonnegative; separable data drives it to 0).
    pub fn from_data(
        rows: Vec<Vec<f64>>,
        signs: Vec<f64>,
        lambda: f64,
        nonsmooth: NonsmoothTerm,
    ) -> Result<ProblemInstance> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(StamError::arg("logistic regression needs N ≥ 1 rows of dimension ≥ 1"));
        }
        check_len("labels", rows.len(), signs.len())?;
        let d = rows[0].len();
        for r in &rows {
            check_len("row", d, r.len())?;
        }
        if signs.iter().any(|&c| c != 1.0 && c != -1.0) {
            return Err(StamError::arg("logistic labels must be ±1"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(StamError::arg(format!("coupling weight {lambda} must be ≥ 0")));
        }
        let n = rows.len();
        let a = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let l1 = (a.transpose() * &a / (4.0 * n as f64))
            .symmetric_eigenvalues()
            .max()
            .max(0.0);
        let l1_components = rows.iter().map(|r| 0.25 * linalg::norm_sq(r)).collect();
        let smoothness =
            SmoothnessProfile::with_quadratic_coupling(l1, l1_components, lambda, 0.0, vec![0.0; n]);
        ProblemInstance::new(
            Arc::new(Logistic { rows, signs }),
            Arc::new(QuadraticCoupling { lambda }),
            nonsmooth.build(d)?,
            d,
            smoothness,
        )
    }
}

/// Random instance with labels from a planted linear model, 10% flipped.
pub fn make_logistic(
    n: usize,
    d: usize,
    lambda: f64,
    nonsmooth: NonsmoothTerm,
    rng: &mut RngStream,
) -> Result<ProblemInstance> {
    if n == 0 || d == 0 {
        return Err(StamError::arg("logistic regression needs N, d ≥ 1"));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng.rng())).collect();
    let mut rows = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d)
            .map(|_| {
                let v: f64 = StandardNormal.sample(rng.rng());
                scale * v
            })
            .collect();
        let mut c = if linalg::dot(&row, &w) >= 0.0 { 1.0 } else { -1.0 };
        if rng.rng().random::<f64>() < 0.1 {
            c = -c;
        }
        signs.push(c);
        rows.push(row);
    }
    Logistic::from_data(rows, signs, lambda, nonsmooth)
}
