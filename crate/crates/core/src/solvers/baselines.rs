use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::ProblemInstance;
use crate::quantization::blend;
use crate::sampling::{stochastic_gradient_g, SampleBatch};

/// Float weights `U`, the weights `W̃` the loss is evaluated at, and the
/// previous `W̃`. The projection onto Q is the prox of the problem's `F`,
/// so trailing unquantized coordinates pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub u: Vec<f64>,
    pub w_tilde: Vec<f64>,
    pub w_prev: Vec<f64>,
    /// Current blend weight (BinaryRelax only).
    pub lambda: f64,
    pub t: usize,
}

impl BaselineState {
    /// `W̃⁰ = Proj_Q(U⁰)`.
    pub fn initial(problem: &ProblemInstance, u0: Vec<f64>, lambda0: f64) -> Result<Self> {
        check_len("u0", problem.dim_y(), u0.len())?;
        let w = problem.prox_f(&u0, 1.0);
        Ok(BaselineState {
            u: u0,
            w_prev: w.clone(),
            w_tilde: w,
            lambda: lambda0,
            t: 0,
        })
    }
}

/// Two-phase schedule of BinaryRelax: the blend weight is multiplied by `rho`
/// after every first-phase step; from epoch `phase_switch_k` on the weights
/// are hard-projected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrParams {
    pub lambda0: f64,
    pub rho: f64,
    pub phase_switch_k: u64,
}

impl BrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(StamError::arg(format!("ρ = {} must exceed 1", self.rho)));
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return Err(StamError::arg(format!("λ₀ = {} must be ≥ 0", self.lambda0)));
        }
        Ok(())
    }
}

fn check_lr(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(StamError::arg(format!("learning rate {gamma} must be ≥ 0")));
    }
    Ok(())
}

fn descend(u: &[f64], grad: &[f64], gamma: f64) -> Vec<f64> {
    u.iter().zip(grad).map(|(a, g)| a - gamma * g).collect()
}

fn finish(state: &BaselineState, u: Vec<f64>, w_tilde: Vec<f64>, lambda: f64) -> Result<BaselineState> {
    let t = state.t + 1;
    if !linalg::all_finite(&u) {
        return Err(StamError::Divergence { iteration: t, what: "float weights" });
    }
    if !linalg::all_finite(&w_tilde) {
        return Err(StamError::Divergence { iteration: t, what: "quantized weights" });
    }
    Ok(BaselineState {
        u,
        w_prev: state.w_tilde.clone(),
        w_tilde,
        lambda,
        t,
    })
}

/// Projected SGD: the gradient is taken at the float iterate,
/// `U⁺ = U − γ∇̃L(U)`, `W̃⁺ = Proj_Q(U⁺)`.
pub fn psgd_step(
    state: &BaselineState,
    problem: &ProblemInstance,
    gamma: f64,
    batch: &SampleBatch,
) -> Result<BaselineState> {
    check_lr(gamma)?;
    let g = stochastic_gradient_g(problem, &state.u, batch)?;
    let u = descend(&state.u, &g, gamma);
    let w = problem.prox_f(&u, gamma);
    finish(state, u, w, state.lambda)
}

/// BinaryConnect: as [`psgd_step`] but the gradient is taken at `W̃`.
pub fn bc_step(
    state: &BaselineState,
    problem: &ProblemInstance,
    gamma: f64,
    batch: &SampleBatch,
) -> Result<BaselineState> {
    check_lr(gamma)?;
    let g = stochastic_gradient_g(problem, &state.w_tilde, batch)?;
    let u = descend(&state.u, &g, gamma);
    let w = problem.prox_f(&u, gamma);
    finish(state, u, w, state.lambda)
}

/// BinaryRelax: `U⁺ = U − γ∇̃L(W̃)`; before epoch `K` the new `W̃` is the
/// blend `(λ Proj_Q(U⁺) + U⁺)/(λ + 1)` and `λ` grows by `ρ`, afterwards it is
/// the projection.
pub fn br_step(
    state: &BaselineState,
    problem: &ProblemInstance,
    gamma: f64,
    params: &BrParams,
    epoch: u64,
    batch: &SampleBatch,
) -> Result<BaselineState> {
    check_lr(gamma)?;
    params.validate()?;
    let g = stochastic_gradient_g(problem, &state.w_tilde, batch)?;
    let u = descend(&state.u, &g, gamma);
    let proj = problem.prox_f(&u, gamma);
    if epoch < params.phase_switch_k {
        // an overflowed weight means the blend is the projection
        let w = if state.lambda.is_finite() {
            blend(&u, &proj, state.lambda)
        } else {
            proj
        };
        finish(state, u, w, params.rho * state.lambda)
    } else {
        finish(state, u, proj, state.lambda)
    }
}

/// Plain SGD on `G`, the full-precision reference: `W̃` mirrors `U`.
pub fn sgd_step(
    state: &BaselineState,
    problem: &ProblemInstance,
    gamma: f64,
    batch: &SampleBatch,
) -> Result<BaselineState> {
    check_lr(gamma)?;
    let g = stochastic_gradient_g(problem, &state.u, batch)?;
    let u = descend(&state.u, &g, gamma);
    finish(state, u.clone(), u, state.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{LeastSquares, NonsmoothTerm};
    use crate::quantization::QuantizedSpace;

    /// `L(W) = ½‖W − (3, −1)‖²` as a single identity-row least-squares pair.
    fn shifted_quadratic() -> ProblemInstance {
        LeastSquares::from_data(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![3.0, -1.0],
            0.0,
            NonsmoothTerm::Quantized(QuantizedSpace::single(2)),
        )
        .unwrap()
    }

    fn state(p: &ProblemInstance, u: [f64; 2]) -> BaselineState {
        BaselineState::initial(p, u.to_vec(), 0.0).unwrap()
    }

    // The two-row form averages: ∇L = (W − (3, −1))/2, so γ is doubled to
    // reproduce a unit-weight step.
    #[test]
    fn psgd_worked_step() {
        let p = shifted_quadratic();
        let s = psgd_step(&state(&p, [1.0, 1.0]), &p, 1.0, &SampleBatch::full(2)).unwrap();
        assert_eq!(s.u, vec![2.0, 0.0]);
        assert_eq!(s.w_tilde, vec![1.0, 1.0]);
    }

    #[test]
    fn psgd_fixed_point_and_zero_step() {
        let p = shifted_quadratic();
        let s = psgd_step(&state(&p, [3.0, -1.0]), &p, 1.0, &SampleBatch::full(2)).unwrap();
        assert_eq!(s.u, vec![3.0, -1.0]);
        assert_eq!(s.w_tilde, vec![2.0, -2.0]);
        let s = psgd_step(&state(&p, [0.5, 1.5]), &p, 0.0, &SampleBatch::full(2)).unwrap();
        assert_eq!(s.u, vec![0.5, 1.5]);
        assert_eq!(s.w_tilde, vec![1.0, 1.0]);
    }

    #[test]
    fn bc_matches_psgd_when_float_is_quantized() {
        let p = shifted_quadratic();
        let s0 = state(&p, [1.0, 1.0]);
        assert_eq!(s0.w_tilde, s0.u);
        let a = psgd_step(&s0, &p, 1.0, &SampleBatch::full(2)).unwrap();
        let b = bc_step(&s0, &p, 1.0, &SampleBatch::full(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.u, vec![2.0, 0.0]);
    }

    #[test]
    fn bc_does_not_move_at_stationary_quantized_point() {
        let p = LeastSquares::from_data(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![2.0, -2.0],
            0.0,
            NonsmoothTerm::Quantized(QuantizedSpace::single(2)),
        )
        .unwrap();
        let mut s = state(&p, [5.0, -0.5]);
        s.w_tilde = vec![2.0, -2.0];
        let n = bc_step(&s, &p, 0.7, &SampleBatch::full(2)).unwrap();
        assert_eq!(n.u, s.u);
    }

    #[test]
    fn br_lambda_growth() {
        let p = shifted_quadratic();
        let params = BrParams {
            lambda0: 1.0,
            rho: 1.02,
            phase_switch_k: 250,
        };
        let mut s = BaselineState::initial(&p, vec![0.3, 0.2], params.lambda0).unwrap();
        for _ in 0..35 {
            s = br_step(&s, &p, 0.01, &params, 0, &SampleBatch::full(2)).unwrap();
        }
        assert!((s.lambda - 1.02f64.powi(35)).abs() < 1e-12);
        assert!((s.lambda - 2.0).abs() < 1e-3);
    }

    #[test]
    fn br_phases() {
        let p = shifted_quadratic();
        let params = BrParams {
            lambda0: 0.0,
            rho: 1.02,
            phase_switch_k: 10,
        };
        let s = BaselineState::initial(&p, vec![0.3, 0.2], 0.0).unwrap();
        let first = br_step(&s, &p, 0.5, &params, 3, &SampleBatch::full(2)).unwrap();
        assert_eq!(first.w_tilde, first.u);
        let bc = bc_step(&s, &p, 0.5, &SampleBatch::full(2)).unwrap();
        let second = br_step(&s, &p, 0.5, &params, 10, &SampleBatch::full(2)).unwrap();
        assert_eq!(second.u, bc.u);
        assert_eq!(second.w_tilde, bc.w_tilde);
        assert!(BrParams { rho: 1.0, ..params }.validate().is_err());
    }
}
