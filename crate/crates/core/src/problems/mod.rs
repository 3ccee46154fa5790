//! Concrete problem instances: finite-sum least squares and logistic regression
//! with a quadratic coupling, and a small ReLU network for quantized training.

pub mod data;
pub mod least_squares;
pub mod logistic;
pub mod mlp;

use std::sync::Arc;

use crate::error::Result;
use crate::linalg;
use crate::model::{FiniteSum, ProblemInstance, Regularizer, ZeroRegularizer};
use crate::quantization::{QuantizedIndicator, QuantizedSpace};

pub use data::{load_csv_dataset, make_blobs, train_test_split, Dataset, Labels};
pub use least_squares::{make_least_squares, LeastSquares};
pub use logistic::{make_logistic, Logistic};
pub use mlp::{make_mlp_problem, Activation, Loss, MlpModel, MlpSpec};

/// Choice of the nonsmooth term `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothTerm {
    Zero,
    /// Indicator of Q on the leading `space.dim()` coordinates.
    Quantized(QuantizedSpace),
}

impl NonsmoothTerm {
    pub(crate) fn build(&self, dim: usize) -> Result<Arc<dyn Regularizer>> {
        Ok(match self {
            NonsmoothTerm::Zero => Arc::new(ZeroRegularizer),
            NonsmoothTerm::Quantized(space) => {
                Arc::new(QuantizedIndicator::new(space.clone(), dim)?)
            }
        })
    }
}

/// `Gᵢ(y) + c/2 ‖y‖²` for every component.
pub struct WeightDecay {
    inner: Arc<dyn FiniteSum>,
    coef: f64,
}

impl FiniteSum for WeightDecay {
    fn n_components(&self) -> usize {
        self.inner.n_components()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn component_value(&self, i: usize, y: &[f64]) -> f64 {
        self.inner.component_value(i, y) + 0.5 * self.coef * linalg::norm_sq(y)
    }

    fn add_component_gradient(&self, i: usize, y: &[f64], weight: f64, out: &mut [f64]) {
        self.inner.add_component_gradient(i, y, weight, out);
        linalg::axpy(weight * self.coef, y, out);
    }
}

/// Adds an L2 penalty `c/2 ‖y‖²` to the loss. Lipschitz constants grow by `c`;
/// lower bounds stay valid since the penalty is nonnegative.
pub fn with_weight_decay(problem: &ProblemInstance, coef: f64) -> Result<ProblemInstance> {
    if coef == 0.0 {
        return Ok(problem.clone());
    }
    if !(coef > 0.0 && coef.is_finite()) {
        return Err(crate::StamError::arg(format!("invalid weight decay {coef}")));
    }
    let g: Arc<dyn FiniteSum> = Arc::new(WeightDecay {
        inner: problem.finite_sum_arc(),
        coef,
    });
    let mut s = problem.smoothness().clone();
    s.l1 += coef;
    s.l1_components.iter_mut().for_each(|l| *l += coef);
    problem.with_finite_sum(g, s)
}
