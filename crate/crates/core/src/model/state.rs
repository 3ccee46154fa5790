use crate::error::{check_len, Result};
use crate::linalg;
use crate::model::ProblemInstance;

/// Iterates `(y, x, u, z)` of the three-block scheme plus the previous `z`,
/// which the stationarity diagnostics need.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub z_prev: Vec<f64>,
    pub t: usize,
}

impl SolverState {
    /// Starts from `y⁰` with `x⁰ = u⁰ = z⁰ = z⁻¹ = prox_F(y⁰, γ)`.
    ///
    /// For the quantization indicator this is the projection of `y⁰` onto Q,
    /// for `F ≡ 0` it is `y⁰` itself.
    pub fn initial(problem: &ProblemInstance, y0: Vec<f64>, gamma: f64) -> Result<Self> {
        check_len("y0", problem.dim_y(), y0.len())?;
        check_len("x0", problem.dim_x(), y0.len())?;
        let x0 = problem.prox_f(&y0, gamma);
        Ok(SolverState::from_parts(y0, x0.clone(), x0.clone(), x0))
    }

    /// A state with `z⁻¹ = z`.
    pub fn from_parts(y: Vec<f64>, x: Vec<f64>, u: Vec<f64>, z: Vec<f64>) -> Self {
        SolverState {
            z_prev: z.clone(),
            y,
            x,
            u,
            z,
            t: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        linalg::all_finite(&self.y)
            && linalg::all_finite(&self.x)
            && linalg::all_finite(&self.u)
            && linalg::all_finite(&self.z)
    }

    /// `‖u − x‖`
    pub fn consensus_gap(&self) -> f64 {
        linalg::dist(&self.u, &self.x)
    }

    /// `‖z − z_prev‖`
    pub fn z_step(&self) -> f64 {
        linalg::dist(&self.z, &self.z_prev)
    }
}
