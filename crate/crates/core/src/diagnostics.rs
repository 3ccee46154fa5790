//! Theory-side quantities: stationarity measures along a run, expected
//! smoothness constants and their empirical check, the step-size constants
//! `K1, K2, K3, M`, the merit function and log-log rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{full_gradient_g, ExtReal, ProblemInstance, SmoothnessProfile, SolverState};
use crate::sampling::{second_moment_vi, stochastic_gradient_g, RngStream, SampleBatch};
use crate::solvers::{gamma_threshold, BaselineState};

/// Stationarity along a run.
///
/// `eta = ‖∇G(y) + ∇ᵧH(u, y)‖²` with the full gradient; `dist_sq_proxy`
/// bounds the squared distance from 0 to `∇ₓH(u, y) + ∂F(u)` through the
/// residual `z − z_prev`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityRecord {
    pub eta: f64,
    pub dist_sq_proxy: f64,
    pub combined: f64,
    pub z_residual: f64,
}

pub fn stationarity(
    problem: &ProblemInstance,
    state: &SolverState,
    gamma: f64,
    l2_star: f64,
) -> Result<StationarityRecord> {
    if !(gamma > 0.0) {
        return Err(StamError::arg(format!("γ = {gamma} must be positive")));
    }
    let mut g = full_gradient_g(problem, &state.y)?;
    linalg::axpy(1.0, &problem.grad_h_y(&state.u, &state.y), &mut g);
    let eta = linalg::norm_sq(&g);
    let dz_sq = linalg::dist_sq(&state.z, &state.z_prev);
    let dist_sq_proxy = 2.0 * dz_sq / (gamma * gamma) + 2.0 * l2_star * l2_star * dz_sq;
    Ok(StationarityRecord {
        eta,
        dist_sq_proxy,
        combined: eta + dist_sq_proxy,
        z_residual: dz_sq.sqrt() / gamma,
    })
}

/// Stationarity of a baseline iterate for `min L + I_Q`.
///
/// `eta = ‖∇G(U)‖²` at the float weights; the proxy is the squared
/// projected-gradient residual `‖(W̃ − Proj_Q(W̃ − γ∇G(W̃)))/γ‖²`;
/// `z_residual = ‖W̃ − W̃_prev‖/γ`.
pub fn baseline_stationarity(
    problem: &ProblemInstance,
    state: &BaselineState,
    gamma: f64,
) -> Result<StationarityRecord> {
    if !(gamma > 0.0) {
        return Err(StamError::arg(format!("γ = {gamma} must be positive")));
    }
    let eta = linalg::norm_sq(&full_gradient_g(problem, &state.u)?);
    let gw = full_gradient_g(problem, &state.w_tilde)?;
    let trial: Vec<f64> = state.w_tilde.iter().zip(&gw).map(|(w, g)| w - gamma * g).collect();
    let proj = problem.prox_f(&trial, gamma);
    let dist_sq_proxy = linalg::dist_sq(&state.w_tilde, &proj) / (gamma * gamma);
    Ok(StationarityRecord {
        eta,
        dist_sq_proxy,
        combined: eta + dist_sq_proxy,
        z_residual: linalg::dist(&state.w_tilde, &state.w_prev) / gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsSource {
    BNice,
    General,
    Declared,
}

/// Constants of the expected smoothness bound
/// `E‖∇̃G(y) + ∇ᵧH(x, y)‖² ≤ 2A(G(y) + H(x, y) − (G+H)^inf) + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsConstants {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub a: f64,
    pub c: f64,
    pub delta_inf: f64,
    pub source: EsSource,
}

impl EsConstants {
    pub fn with_a(self, a: f64) -> Self {
        EsConstants { a, ..self }
    }
}

/// Constants for `b`-nice sampling:
/// `A = (4 maxᵢ L1ⁱ E[vᵢ²] + L3*)/2`, `C = 2AΔ^inf` with
/// `Δ^inf = (1/N) Σᵢ ((G+H)^inf − Gᵢ^inf − H^inf)`.
pub fn es_constants_b_nice(problem: &ProblemInstance, b: usize) -> Result<EsConstants> {
    let s = problem.smoothness();
    let n = problem.n_components();
    if s.l1_components.len() != n || s.gi_inf.len() != n {
        return Err(StamError::Config(format!(
            "smoothness profile lists {} component constants and {} infima for {n} components",
            s.l1_components.len(),
            s.gi_inf.len()
        )));
    }
    let v2 = second_moment_vi(n, b)?;
    let a = (4.0 * s.max_component_l1() * v2 + s.l3_star) / 2.0;
    let mean_gi: f64 = s.gi_inf.iter().sum::<f64>() / n as f64;
    let mut delta_inf = s.gh_inf - mean_gi - s.h_inf;
    if delta_inf < 0.0 {
        log::warn!("negative infimum gap {delta_inf:e} clamped to 0");
        delta_inf = 0.0;
    }
    Ok(EsConstants {
        a0: 0.0,
        b0: 0.0,
        c0: 0.0,
        a,
        c: 2.0 * a * delta_inf,
        delta_inf,
        source: EsSource::BNice,
    })
}

/// `A = max(2A0 + 2B0 L1, 2L3*)`, `C = 2A((G+H)^inf − G^inf − H^inf) + 2C0`.
pub fn es_constants_general(a0: f64, b0: f64, c0: f64, profile: &SmoothnessProfile) -> Result<EsConstants> {
    if !(a0 >= 0.0 && b0 >= 0.0 && c0 >= 0.0) {
        return Err(StamError::arg("A0, B0, C0 must be nonnegative"));
    }
    let a = (2.0 * a0 + 2.0 * b0 * profile.l1).max(2.0 * profile.l3_star);
    let mut gap = profile.gh_inf - profile.g_inf - profile.h_inf;
    if gap < 0.0 {
        log::warn!("negative infimum gap {gap:e} clamped to 0");
        gap = 0.0;
    }
    Ok(EsConstants {
        a0,
        b0,
        c0,
        a,
        c: 2.0 * a * gap + 2.0 * c0,
        delta_inf: gap,
        source: EsSource::General,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsMode {
    /// Exact expectation over all `C(N, b)` subsets; requires `N ≤ 8`.
    Exhaustive,
    /// Average over this many independent draws.
    MonteCarlo(usize),
}

/// All size-`b` subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(b);
    fn rec(start: usize, n: usize, b: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == b {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < b - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, b, cur, out);
            cur.pop();
        }
    }
    rec(0, n, b, &mut cur, &mut out);
    out
}

/// `E‖∇̃G(y) + ∇ᵧH(x, y)‖²` under `b`-nice sampling.
pub fn es_lhs(
    problem: &ProblemInstance,
    x: &[f64],
    y: &[f64],
    b: usize,
    mode: EsMode,
    rng: &mut RngStream,
) -> Result<f64> {
    let n = problem.n_components();
    let gy = problem.grad_h_y(x, y);
    let sq = |batch: &SampleBatch| -> Result<f64> {
        let mut g = stochastic_gradient_g(problem, y, batch)?;
        linalg::axpy(1.0, &gy, &mut g);
        Ok(linalg::norm_sq(&g))
    };
    match mode {
        EsMode::Exhaustive => {
            if n > 8 {
                return Err(StamError::arg(format!(
                    "exhaustive expectation over subsets refused for N = {n} > 8"
                )));
            }
            let all = subsets(n, b);
            let mut acc = 0.0;
            for s in &all {
                acc += sq(&SampleBatch::from_indices(n, s.clone())?)?;
            }
            Ok(acc / all.len() as f64)
        }
        EsMode::MonteCarlo(draws) => {
            if draws == 0 {
                return Err(StamError::arg("Monte Carlo estimate needs at least one draw"));
            }
            let mut acc = 0.0;
            for _ in 0..draws {
                acc += sq(&crate::sampling::draw_b_nice(n, b, rng)?)?;
            }
            Ok(acc / draws as f64)
        }
    }
}

/// `2A(G(y) + H(x, y) − (G+H)^inf) + C`
pub fn es_rhs(problem: &ProblemInstance, constants: &EsConstants, x: &[f64], y: &[f64]) -> f64 {
    let gap = problem.value_g(y) + problem.value_h(x, y) - problem.smoothness().gh_inf;
    2.0 * constants.a * gap + constants.c
}

/// Largest `LHS − RHS` of the expected smoothness bound over `points` random
/// pairs `(x, y)` with coordinates uniform in `[−scale, scale]`. A value
/// `≤ 0` means the bound held everywhere.
#[allow(clippy::too_many_arguments)]
pub fn verify_es(
    problem: &ProblemInstance,
    constants: &EsConstants,
    b: usize,
    points: usize,
    scale: f64,
    mode: EsMode,
    rng: &mut RngStream,
) -> Result<f64> {
    if !problem.smoothness().l1_analytic {
        log::info!("L1 is a declared estimate; the expected smoothness check is heuristic");
    }
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..points {
        let x: Vec<f64> = (0..dx).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
        let y: Vec<f64> = (0..dy).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
        let lhs = es_lhs(problem, &x, &y, b, mode, rng)?;
        worst = worst.max(lhs - es_rhs(problem, constants, &x, &y));
    }
    Ok(worst)
}

/// Step-size constants of the descent analysis at a given `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub m: f64,
    pub l: f64,
    pub gamma_max: f64,
    pub satisfied: bool,
}

pub fn splitting_constants(gamma: f64, profile: &SmoothnessProfile) -> Result<ThresholdReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(StamError::arg(format!("γ = {gamma} must be positive")));
    }
    let (l, l2, l4) = (profile.weak_convexity, profile.l2_star, profile.l4_star);
    let k1 = (1.0 - (10.0 * (l + l2) + 4.0) * gamma - 5.0 * l2 * l2 * gamma * gamma) / (4.0 * gamma);
    let k2 = 5.0 * (1.0 + gamma * l2).powi(2) / (4.0 * gamma * gamma);
    let k3 = l4 * (1.0 + 5.0 * gamma * l4) + 5.0 * k1 * l4 * l4 / k2;
    let gamma_max = match gamma_threshold(l, l2) {
        Ok(g) => g,
        Err(StamError::NoValidGamma(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(ThresholdReport {
        k1,
        k2,
        k3,
        m: 2.0 * k3,
        l: profile.lipschitz_l(),
        gamma_max,
        satisfied: k1 > 0.0,
    })
}

/// `β` large enough for the `O(ε⁻⁴)` guarantee over `T` iterations:
/// the maximum of `√((L + M)AT)`, `2K2/K1` and `2(L + M)C/ε²`.
pub fn budget_beta(report: &ThresholdReport, es: &EsConstants, iterations: u64, eps: f64) -> Result<f64> {
    if !report.satisfied {
        return Err(StamError::NoValidGamma(format!(
            "K1 = {} is not positive at this γ",
            report.k1
        )));
    }
    let lm = report.l + report.m;
    let mut beta = (lm * es.a * iterations as f64).sqrt().max(2.0 * report.k2 / report.k1);
    if es.c > 0.0 {
        if !(eps > 0.0) {
            return Err(StamError::arg("ε must be positive when C > 0"));
        }
        beta = beta.max(2.0 * lm * es.c / (eps * eps));
    }
    Ok(beta)
}

/// `M_t = F(u) + ‖2x − u − z‖²/(2γ) − ‖x − z‖²/(2γ) − ‖u − x‖²/γ`
pub fn merit_value(problem: &ProblemInstance, state: &SolverState, gamma: f64) -> ExtReal {
    let refl: Vec<f64> = state
        .x
        .iter()
        .zip(state.u.iter().zip(&state.z))
        .map(|(x, (u, z))| 2.0 * x - u - z)
        .collect();
    problem.value_f(&state.u)
        + (linalg::norm_sq(&refl) / (2.0 * gamma)
            - linalg::dist_sq(&state.x, &state.z) / (2.0 * gamma)
            - linalg::dist_sq(&state.u, &state.x) / gamma)
}

/// Least-squares slope of `log ε²` against `log T`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(StamError::arg(format!(
            "a rate fit needs at least 3 budgets, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(t, e)| !(t > 0.0) || !(e > 0.0)) {
        return Err(StamError::arg("budgets and stationarity values must be positive"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(StamError::arg("budgets must not all coincide"));
    }
    Ok(sxy / sxx)
}

/// Exact `dist(0, ∇ₓH(u, y) + ∂F(u))²` when `F ≡ 0`.
pub fn exact_dist_sq_smooth(problem: &ProblemInstance, state: &SolverState) -> Result<f64> {
    check_len("u", problem.dim_x(), state.u.len())?;
    Ok(linalg::norm_sq(&problem.grad_h_x(&state.u, &state.y)))
}
