use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{FiniteSum, ProblemInstance, QuadraticCoupling, SmoothnessProfile};
use crate::problems::NonsmoothTerm;
use crate::sampling::RngStream;

/// `Gᵢ(y) = ½ (aᵢᵀy − bᵢ)²`
#[derive(Debug, Clone)]
pub struct LeastSquares {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl FiniteSum for LeastSquares {
    fn n_components(&self) -> usize {
        self.rows.len()
    }

    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn component_value(&self, i: usize, y: &[f64]) -> f64 {
        let r = linalg::dot(&self.rows[i], y) - self.targets[i];
        0.5 * r * r
    }

    fn add_component_gradient(&self, i: usize, y: &[f64], weight: f64, out: &mut [f64]) {
        let a = &self.rows[i];
        let r = weight * (linalg::dot(a, y) - self.targets[i]);
        for (o, aj) in out.iter_mut().zip(a) {
            *o += r * aj;
        }
    }
}

impl LeastSquares {
    /// Builds the problem `(F, G, H)` with `H = λ/2 ‖x − y‖²` from explicit data.
    ///
    /// Constants are analytic: `L1ⁱ = ‖aᵢ‖²`, `L1 = λ_max(AᵀA/N)`,
    /// `Gᵢ^inf = 0` and `G^inf` is the least-squares residual.
    pub fn from_data(
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        lambda: f64,
        nonsmooth: NonsmoothTerm,
    ) -> Result<ProblemInstance> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(StamError::arg("least squares needs N ≥ 1 rows of dimension d ≥ 1"));
        }
        check_len("targets", rows.len(), targets.len())?;
        let d = rows[0].len();
        for r in &rows {
            check_len("row", d, r.len())?;
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(StamError::arg(format!("coupling weight {lambda} must be ≥ 0")));
        }
        let n = rows.len();
        let a = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let b = DVector::from_column_slice(&targets);
        let gram = a.transpose() * &a / n as f64;
        let l1 = gram.symmetric_eigenvalues().max().max(0.0);
        let svd = a.clone().svd(true, true);
        let y_star = svd
            .solve(&b, 1e-12)
            .map_err(|e| StamError::Argument(format!("least-squares solve failed: {e}")))?;
        let resid = &a * y_star - &b;
        let g_inf = 0.5 * resid.norm_squared() / n as f64;

        let l1_components = rows.iter().map(|r| linalg::norm_sq(r)).collect();
        let smoothness =
            SmoothnessProfile::with_quadratic_coupling(l1, l1_components, lambda, g_inf, vec![0.0; n]);
        let g = Arc::new(LeastSquares { rows, targets });
        ProblemInstance::new(
            g,
            Arc::new(QuadraticCoupling { lambda }),
            nonsmooth.build(d)?,
            d,
            smoothness,
        )
    }
}

/// Random instance: `aᵢ ~ N(0, I/d)`, `bᵢ = aᵢᵀy_true + noise·ε` with
/// `y_true ~ N(0, I)`.
pub fn make_least_squares(
    n: usize,
    d: usize,
    lambda: f64,
    noise: f64,
    nonsmooth: NonsmoothTerm,
    rng: &mut RngStream,
) -> Result<ProblemInstance> {
    if n == 0 || d == 0 {
        return Err(StamError::arg("least squares needs N, d ≥ 1"));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut normal = || -> f64 { StandardNormal.sample(rng.rng()) };
    let y_true: Vec<f64> = (0..d).map(|_| normal()).collect();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| scale * normal()).collect();
        targets.push(linalg::dot(&row, &y_true) + noise * normal());
        rows.push(row);
    }
    LeastSquares::from_data(rows, targets, lambda, nonsmooth)
}
