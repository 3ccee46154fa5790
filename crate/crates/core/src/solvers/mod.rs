//! The three-block iteration, its quantized closed form, the binary-network
//! baselines and a driver that runs any of them under parameter schedules.

mod baselines;
mod driver;
mod stam;

pub use baselines::{bc_step, br_step, psgd_step, sgd_step, BaselineState, BrParams};
pub use driver::{
    run_solver, Algorithm, Evaluator, RunOutcome, RunSpec, RunSummary, StamParams, TraceRecord,
};
pub use stam::{stam_quantized_step, stam_step, StepReport};

use crate::error::{Result, StamError};

/// Largest `γ` with `1 − (10(l + L2*) + 4)γ − 5(L2*)²γ² > 0`.
///
/// Returns the positive root of that quadratic, written as
/// `2 / (c + √(c² + 20(L2*)²))` with `c = 10(l + L2*) + 4` so that it stays
/// accurate as `L2* → 0`, where it tends to `1/(10l + 4)`.
pub fn gamma_threshold(l: f64, l2_star: f64) -> Result<f64> {
    if !(l2_star >= 0.0) || !l.is_finite() || !l2_star.is_finite() {
        return Err(StamError::arg(format!("invalid constants l = {l}, L2* = {l2_star}")));
    }
    let c = 10.0 * (l + l2_star) + 4.0;
    let disc = (c * c + 20.0 * l2_star * l2_star).sqrt();
    let denom = c + disc;
    if denom <= 0.0 {
        return Err(StamError::NoValidGamma(format!(
            "K1 is never positive for l = {l}, L2* = {l2_star}"
        )));
    }
    let g = 2.0 / denom;
    if !(g > 0.0) || !g.is_finite() {
        return Err(StamError::NoValidGamma(format!("threshold {g} for l = {l}")));
    }
    Ok(g)
}
