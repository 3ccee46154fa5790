use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::SmoothnessProfile;
use crate::quantization::QuantizedSpace;

/// Extended real value. Indicator functions evaluate to `Infinity` outside
/// their set; this is never encoded as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinity => None,
        }
    }

    /// Lossy conversion; `Infinity` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v + rhs),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

/// The smooth finite sum `G(y) = (1/N) Σᵢ Gᵢ(y)`.
pub trait FiniteSum: Send + Sync {
    fn n_components(&self) -> usize;

    fn dim(&self) -> usize;

    fn component_value(&self, i: usize, y: &[f64]) -> f64;

    /// Accumulates `weight · ∇Gᵢ(y)` into `out`.
    fn add_component_gradient(&self, i: usize, y: &[f64], weight: f64, out: &mut [f64]);

    fn component_gradient(&self, i: usize, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.add_component_gradient(i, y, 1.0, &mut g);
        g
    }
}

/// The coupling term `H(x, y)`.
pub trait Coupling: Send + Sync {
    fn value(&self, x: &[f64], y: &[f64]) -> f64;

    fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// An exact minimizer of `H(x, y) + ‖x − z‖² / (2γ)` over `x`.
    fn argmin_x(&self, y: &[f64], z: &[f64], gamma: f64) -> Vec<f64>;

    /// `Some(λ)` when the coupling is `λ/2 ‖x − y‖²`.
    fn quadratic_weight(&self) -> Option<f64> {
        None
    }
}

/// The nonsmooth term `F(x)`, accessed through its value and proximal map.
pub trait Regularizer: Send + Sync {
    fn value(&self, x: &[f64]) -> ExtReal;

    /// A minimizer of `F(u) + ‖v − u‖² / (2γ)`. Set-valued maps must pick a
    /// deterministic selection.
    fn prox(&self, v: &[f64], gamma: f64) -> Vec<f64>;

    /// The quantization set, when this is an indicator of per-layer binary weights.
    fn quantized_space(&self) -> Option<&QuantizedSpace> {
        None
    }
}

/// `H(x, y) = λ/2 ‖x − y‖²`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticCoupling {
    pub lambda: f64,
}

impl Coupling for QuadraticCoupling {
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        0.5 * self.lambda * linalg::dist_sq(x, y)
    }

    fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| self.lambda * (a - b)).collect()
    }

    fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        y.iter().zip(x).map(|(a, b)| self.lambda * (a - b)).collect()
    }

    fn argmin_x(&self, y: &[f64], z: &[f64], gamma: f64) -> Vec<f64> {
        // z + γλ/(γλ+1)·(y − z): returns z bit-exactly when y = z
        let gl = gamma * self.lambda;
        let w = gl / (gl + 1.0);
        y.iter().zip(z).map(|(yv, zv)| zv + w * (yv - zv)).collect()
    }

    fn quadratic_weight(&self) -> Option<f64> {
        Some(self.lambda)
    }
}

/// `F ≡ 0`; its prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroRegularizer;

impl Regularizer for ZeroRegularizer {
    fn value(&self, _x: &[f64]) -> ExtReal {
        ExtReal::Finite(0.0)
    }

    fn prox(&self, v: &[f64], _gamma: f64) -> Vec<f64> {
        v.to_vec()
    }
}

/// The triple `(F, G, H)` together with its smoothness constants.
#[derive(Clone)]
pub struct ProblemInstance {
    g: Arc<dyn FiniteSum>,
    h: Arc<dyn Coupling>,
    f: Arc<dyn Regularizer>,
    dim_x: usize,
    smoothness: SmoothnessProfile,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("n_components", &self.n_components())
            .field("dim_y", &self.dim_y())
            .field("dim_x", &self.dim_x)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(
        g: Arc<dyn FiniteSum>,
        h: Arc<dyn Coupling>,
        f: Arc<dyn Regularizer>,
        dim_x: usize,
        smoothness: SmoothnessProfile,
    ) -> Result<Self> {
        let n = g.n_components();
        if n == 0 || g.dim() == 0 || dim_x == 0 {
            return Err(StamError::arg("problem dimensions must be positive"));
        }
        check_len("L1 components", n, smoothness.l1_components.len())?;
        check_len("Gi infima", n, smoothness.gi_inf.len())?;
        Ok(ProblemInstance {
            g,
            h,
            f,
            dim_x,
            smoothness,
        })
    }

    pub fn n_components(&self) -> usize {
        self.g.n_components()
    }

    pub fn dim_y(&self) -> usize {
        self.g.dim()
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn smoothness(&self) -> &SmoothnessProfile {
        &self.smoothness
    }

    pub fn finite_sum(&self) -> &dyn FiniteSum {
        self.g.as_ref()
    }

    pub fn finite_sum_arc(&self) -> Arc<dyn FiniteSum> {
        Arc::clone(&self.g)
    }

    pub fn coupling(&self) -> &dyn Coupling {
        self.h.as_ref()
    }

    pub fn regularizer(&self) -> &dyn Regularizer {
        self.f.as_ref()
    }

    pub fn component_value(&self, i: usize, y: &[f64]) -> f64 {
        self.g.component_value(i, y)
    }

    pub fn component_gradient(&self, i: usize, y: &[f64]) -> Vec<f64> {
        self.g.component_gradient(i, y)
    }

    /// `G(y)`, averaged in index order.
    pub fn value_g(&self, y: &[f64]) -> f64 {
        let n = self.n_components();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.g.component_value(i, y);
        }
        acc / n as f64
    }

    pub fn value_h(&self, x: &[f64], y: &[f64]) -> f64 {
        self.h.value(x, y)
    }

    pub fn grad_h_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.h.grad_x(x, y)
    }

    pub fn grad_h_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.h.grad_y(x, y)
    }

    pub fn prox_f(&self, v: &[f64], gamma: f64) -> Vec<f64> {
        self.f.prox(v, gamma)
    }

    pub fn value_f(&self, x: &[f64]) -> ExtReal {
        self.f.value(x)
    }

    /// Same problem with the quadratic coupling weight replaced by `lambda`.
    /// Fails when the coupling is not quadratic.
    pub fn with_coupling_weight(&self, lambda: f64) -> Result<ProblemInstance> {
        if self.h.quadratic_weight().is_none() {
            return Err(StamError::arg(
                "coupling weight can only be rescheduled for a quadratic coupling",
            ));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(StamError::arg(format!("invalid coupling weight {lambda}")));
        }
        let mut smoothness = self.smoothness.clone();
        smoothness.rescale_coupling(lambda);
        Ok(ProblemInstance {
            g: Arc::clone(&self.g),
            h: Arc::new(QuadraticCoupling { lambda }),
            f: Arc::clone(&self.f),
            dim_x: self.dim_x,
            smoothness,
        })
    }

    /// Same problem with a different nonsmooth term.
    pub fn with_regularizer(&self, f: Arc<dyn Regularizer>) -> ProblemInstance {
        ProblemInstance {
            f,
            ..self.clone()
        }
    }

    /// Same problem with `G` replaced by another finite sum of identical shape.
    pub fn with_finite_sum(
        &self,
        g: Arc<dyn FiniteSum>,
        smoothness: SmoothnessProfile,
    ) -> Result<ProblemInstance> {
        check_len("finite sum dimension", self.dim_y(), g.dim())?;
        ProblemInstance::new(g, Arc::clone(&self.h), Arc::clone(&self.f), self.dim_x, smoothness)
    }
}

/// `Φ(x, y) = F(x) + G(y) + H(x, y)`.
pub fn evaluate_phi(problem: &ProblemInstance, y: &[f64], x: &[f64]) -> Result<ExtReal> {
    check_len("y", problem.dim_y(), y.len())?;
    check_len("x", problem.dim_x(), x.len())?;
    Ok(problem.value_f(x) + (problem.value_g(y) + problem.value_h(x, y)))
}

/// `∇G(y) = (1/N) Σᵢ ∇Gᵢ(y)`, summed in index order.
pub fn full_gradient_g(problem: &ProblemInstance, y: &[f64]) -> Result<Vec<f64>> {
    check_len("y", problem.dim_y(), y.len())?;
    let n = problem.n_components();
    let mut sum = vec![0.0; y.len()];
    let mut scratch = vec![0.0; y.len()];
    for i in 0..n {
        scratch.iter_mut().for_each(|v| *v = 0.0);
        problem.finite_sum().add_component_gradient(i, y, 1.0, &mut scratch);
        if !linalg::all_finite(&scratch) {
            return Err(StamError::NonFiniteComponent { component: i });
        }
        linalg::axpy(1.0, &scratch, &mut sum);
    }
    let inv = n as f64;
    sum.iter_mut().for_each(|v| *v /= inv);
    Ok(sum)
}
