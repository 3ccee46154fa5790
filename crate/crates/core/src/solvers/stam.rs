use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{ProblemInstance, SolverState};
use crate::quantization::QuantizedIndicator;
use crate::sampling::{stochastic_gradient_g, SampleBatch};

/// Outcome of one iteration. Counters are per step; the driver sums them.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: SolverState,
    pub grad_draws: usize,
    pub prox_calls: usize,
}

fn check_finite(state: &SolverState) -> Result<()> {
    for (what, v) in [("y", &state.y), ("x", &state.x), ("u", &state.u), ("z", &state.z)] {
        if !linalg::all_finite(v) {
            return Err(StamError::Divergence {
                iteration: state.t,
                what,
            });
        }
    }
    Ok(())
}

fn check_steps(gamma: f64, beta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(StamError::arg(format!("γ = {gamma} must be positive")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(StamError::arg(format!("β = {beta} must be positive")));
    }
    Ok(())
}

/// One STAM iteration:
///
/// ```text
/// y⁺ = y − (∇̃G(y) + ∇ᵧH(x, y)) / β
/// x⁺ = argmin H(·, y⁺) + ‖· − z‖²/(2γ)
/// u⁺ = prox_{γF}(2x⁺ − z)
/// z⁺ = z + u⁺ − x⁺
/// ```
pub fn stam_step(
    state: &SolverState,
    problem: &ProblemInstance,
    gamma: f64,
    beta: f64,
    batch: &SampleBatch,
) -> Result<StepReport> {
    check_steps(gamma, beta)?;
    check_len("y", problem.dim_y(), state.y.len())?;
    check_len("z", problem.dim_x(), state.z.len())?;

    let mut dir = stochastic_gradient_g(problem, &state.y, batch)?;
    let gy = problem.grad_h_y(&state.x, &state.y);
    linalg::axpy(1.0, &gy, &mut dir);
    let y: Vec<f64> = state.y.iter().zip(&dir).map(|(v, d)| v - d / beta).collect();

    let x = problem.coupling().argmin_x(&y, &state.z, gamma);
    let reflected: Vec<f64> = x.iter().zip(&state.z).map(|(xv, zv)| 2.0 * xv - zv).collect();
    let u = problem.prox_f(&reflected, gamma);
    let z: Vec<f64> = state
        .z
        .iter()
        .zip(u.iter().zip(&x))
        .map(|(zv, (uv, xv))| zv + (uv - xv))
        .collect();

    let next = SolverState {
        y,
        x,
        u,
        z_prev: state.z.clone(),
        z,
        t: state.t + 1,
    };
    check_finite(&next)?;
    Ok(StepReport {
        state: next,
        grad_draws: batch.size(),
        prox_calls: 1,
    })
}

/// The same iteration written for `H = λ/2 ‖W − W̃‖²` and `F = I_Q`, in the
/// variables `(W, U, V, X) = (y, x, u, z)`:
///
/// ```text
/// W⁺ = ((β − λ)W + λU − ∇̃L(W)) / β
/// U⁺ = (γλW⁺ + X) / (γλ + 1)
/// V⁺ = Proj_Q(2U⁺ − X)
/// X⁺ = X + V⁺ − U⁺
/// ```
///
/// `loss_grad` is the caller's estimate of `∇L(W)`.
pub fn stam_quantized_step(
    state: &SolverState,
    loss_grad: &[f64],
    gamma: f64,
    beta: f64,
    lambda: f64,
    indicator: &QuantizedIndicator,
) -> Result<StepReport> {
    check_steps(gamma, beta)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(StamError::arg(format!("λ = {lambda} must be ≥ 0")));
    }
    check_len("loss gradient", state.y.len(), loss_grad.len())?;

    let w: Vec<f64> = state
        .y
        .iter()
        .zip(&state.x)
        .zip(loss_grad)
        .map(|((wv, uv), g)| ((beta - lambda) * wv + lambda * uv - g) / beta)
        .collect();
    let gl = gamma * lambda;
    let u: Vec<f64> = w
        .iter()
        .zip(&state.z)
        .map(|(wv, xv)| (gl * wv + xv) / (gl + 1.0))
        .collect();
    let reflected: Vec<f64> = u.iter().zip(&state.z).map(|(uv, xv)| 2.0 * uv - xv).collect();
    let v = indicator.project(&reflected)?;
    let x: Vec<f64> = state
        .z
        .iter()
        .zip(v.iter().zip(&u))
        .map(|(xv, (vv, uv))| xv + (vv - uv))
        .collect();

    let next = SolverState {
        y: w,
        x: u,
        u: v,
        z_prev: state.z.clone(),
        z: x,
        t: state.t + 1,
    };
    check_finite(&next)?;
    Ok(StepReport {
        state: next,
        grad_draws: 0,
        prox_calls: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{LeastSquares, NonsmoothTerm};
    use crate::quantization::{QuantizedIndicator, QuantizedSpace};
    use crate::sampling::RngStream;

    fn scalar_toy(lambda: f64) -> ProblemInstance {
        LeastSquares::from_data(vec![vec![1.0]], vec![4.0], lambda, NonsmoothTerm::Zero).unwrap()
    }

    #[test]
    fn worked_scalar_step() {
        let p = scalar_toy(1.0);
        let s = SolverState::from_parts(vec![0.0], vec![0.0], vec![0.0], vec![0.0]);
        let r = stam_step(&s, &p, 1.0, 2.0, &SampleBatch::full(1)).unwrap();
        assert_eq!(
            (r.state.y[0], r.state.x[0], r.state.u[0], r.state.z[0]),
            (2.0, 1.0, 2.0, 1.0)
        );
        assert_eq!(r.state.z_prev, vec![0.0]);
        assert_eq!(r.state.t, 1);
        assert_eq!((r.grad_draws, r.prox_calls), (1, 1));
    }

    #[test]
    fn stationary_point_is_fixed() {
        let p = scalar_toy(1.0);
        let s = SolverState::from_parts(vec![4.0], vec![4.0], vec![4.0], vec![4.0]);
        for gamma in [1.0, 0.02, 0.3] {
            let r = stam_step(&s, &p, gamma, 2.0, &SampleBatch::full(1)).unwrap();
            assert_eq!(r.state.y, s.y);
            assert_eq!(r.state.x, s.x);
            assert_eq!(r.state.u, s.u);
            assert_eq!(r.state.z, s.z);
        }
    }

    #[test]
    fn quantized_worked_step() {
        // G ≡ 0 and β huge keep y⁺ = y
        let p = LeastSquares::from_data(
            vec![vec![0.0, 0.0]],
            vec![0.0],
            1.0,
            NonsmoothTerm::Quantized(QuantizedSpace::single(2)),
        )
        .unwrap();
        let s = SolverState::from_parts(vec![3.0, -1.0], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]);
        let r = stam_step(&s, &p, 1.0, 1e300, &SampleBatch::full(1)).unwrap();
        assert_eq!(r.state.y, vec![3.0, -1.0]);
        assert_eq!(r.state.x, vec![1.5, -0.5]);
        assert_eq!(r.state.u, vec![2.0, -2.0]);
        assert_eq!(r.state.z, vec![0.5, -1.5]);
    }

    #[test]
    fn zero_coupling_is_plain_gradient_step() {
        let ind = QuantizedIndicator::new(QuantizedSpace::single(2), 2).unwrap();
        let s = SolverState::from_parts(vec![1.0, 2.0], vec![5.0, 5.0], vec![0.0; 2], vec![0.0; 2]);
        let r = stam_quantized_step(&s, &[0.5, -1.0], 1.0, 4.0, 0.0, &ind).unwrap();
        assert_eq!(r.state.y, vec![1.0 - 0.125, 2.0 + 0.25]);
        // γλ = 0 collapses U⁺ onto X
        assert_eq!(r.state.x, s.z);
    }

    #[test]
    fn divergence_reports_iteration() {
        let p = scalar_toy(1.0);
        let mut s = SolverState::from_parts(vec![1e300], vec![0.0], vec![0.0], vec![0.0]);
        s.t = 6;
        let err = stam_step(&s, &p, 1.0, 1e-300, &SampleBatch::full(1)).unwrap_err();
        assert!(matches!(err, StamError::Divergence { iteration: 7, .. }), "{err}");
    }

    #[test]
    fn z_identity_on_quantized_problem() {
        let mut rng = RngStream::new(4, 0);
        let space = QuantizedSpace::from_lengths(&[3, 3]).unwrap();
        let p = crate::problems::make_least_squares(5, 6, 0.7, 0.1, NonsmoothTerm::Quantized(space), &mut rng)
            .unwrap();
        let mut s = SolverState::initial(&p, vec![0.3; 6], 0.5).unwrap();
        for _ in 0..50 {
            let batch = crate::sampling::draw_b_nice(5, 2, &mut rng).unwrap();
            let r = stam_step(&s, &p, 0.5, 10.0, &batch).unwrap();
            for j in 0..6 {
                assert_eq!(r.state.z_prev[j], s.z[j]);
                assert_eq!(r.state.z[j], s.z[j] + (r.state.u[j] - r.state.x[j]));
            }
            s = r.state;
        }
    }
}
