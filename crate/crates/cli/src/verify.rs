//! Fixed-seed oracle checks behind `stam verify <suite>`.

use stam_core::diagnostics::{es_constants_b_nice, splitting_constants, subsets, verify_es, EsMode};
use stam_core::model::full_gradient_g;
use stam_core::problems::{
    make_blobs, make_least_squares, make_logistic, make_mlp_problem, Activation, Loss, MlpSpec,
    NonsmoothTerm,
};
use stam_core::quantization::project_q;
use stam_core::sampling::{second_moment_vi, stochastic_gradient_g, SampleBatch};
use stam_core::solvers::gamma_threshold;
use stam_core::{linalg, ProblemInstance, QuantizedSpace, RngStream, SmoothnessProfile};

use crate::error::{CliError, Result};

pub const SUITES: [&str; 5] = ["projection", "unbiasedness", "es", "threshold", "gradients"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

pub fn run_suite(suite: &str) -> Result<Vec<Check>> {
    match suite {
        "projection" => projection(),
        "unbiasedness" => unbiasedness(),
        "es" => es(),
        "threshold" => threshold(),
        "gradients" => gradients(),
        other => Err(CliError::UnknownSuite(other.to_string())),
    }
}

fn uniform_vec(n: usize, scale: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..n).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect()
}

/// Minimum of `‖sZ − U‖²` over all sign patterns, with the best
/// nonnegative `s = max(0, ⟨Z, U⟩/n)` per pattern.
pub fn exhaustive_projection_gap(u: &[f64]) -> f64 {
    let n = u.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let z: Vec<f64> = (0..n).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let s = (linalg::dot(&z, u) / n as f64).max(0.0);
        let d: f64 = z.iter().zip(u).map(|(zj, uj)| (s * zj - uj).powi(2)).sum();
        best = best.min(d);
    }
    best
}

fn projection() -> Result<Vec<Check>> {
    let mut rng = RngStream::new(0x51, 0);
    let mut checks = Vec::new();
    for n in 1..=12 {
        let space = QuantizedSpace::single(n);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let u = uniform_vec(n, 5.0, &mut rng);
            let closed = linalg::dist_sq(&u, &project_q(&u, &space).dense);
            worst = worst.max((closed - exhaustive_projection_gap(&u)).abs());
        }
        checks.push(Check::new(
            format!("projection n={n}"),
            worst <= 1e-12,
            format!("max gap {worst:.3e} over 1000 vectors"),
        ));
    }
    Ok(checks)
}

fn unbiasedness() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        let mut rng = RngStream::new(0x52, n as u64);
        let p = make_least_squares(n, 3, 1.0, 0.5, NonsmoothTerm::Zero, &mut rng)?;
        for b in 1..=n {
            let all = subsets(n, b);
            for _ in 0..20 {
                let y = uniform_vec(3, 3.0, &mut rng);
                let full = full_gradient_g(&p, &y)?;
                let mut mean = vec![0.0; 3];
                for s in &all {
                    let g = stochastic_gradient_g(&p, &y, &SampleBatch::from_indices(n, s.clone())?)?;
                    linalg::axpy(1.0 / all.len() as f64, &g, &mut mean);
                }
                worst = worst.max(
                    mean.iter()
                        .zip(&full)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                );
            }
        }
    }
    checks.push(Check::new(
        "subset average equals full gradient (N ≤ 8, all b)",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    let mut mismatches = 0;
    for n in 1..=8usize {
        for b in 1..=n {
            let all = subsets(n, b);
            let total = all.len() as u128;
            for i in 0..n {
                let hits = all.iter().filter(|s| s.contains(&i)).count() as u128;
                // E[vᵢ²] = hits·(N/b)²/total must equal N/b: hits·N = b·total
                let rational_ok = hits * n as u128 == b as u128 * total;
                let float_ok = second_moment_vi(n, b)? == n as f64 / b as f64;
                if !(rational_ok && float_ok) {
                    mismatches += 1;
                }
            }
        }
    }
    checks.push(Check::new(
        "second moment E[v_i^2] = N/b by enumeration",
        mismatches == 0,
        format!("{mismatches} mismatches"),
    ));
    Ok(checks)
}

/// The least-squares instance used by the ES checks: `N = 8`, `d = 4`,
/// coupling weight 4.
pub fn es_instance() -> Result<ProblemInstance> {
    let mut rng = RngStream::new(0x53, 0);
    Ok(make_least_squares(8, 4, 4.0, 1.0, NonsmoothTerm::Zero, &mut rng)?)
}

fn es() -> Result<Vec<Check>> {
    let p = es_instance()?;
    let mut checks = Vec::new();
    let mut control_worst = f64::NEG_INFINITY;
    for b in [1usize, 2, 4, 8] {
        let c = es_constants_b_nice(&p, b)?;
        let mut rng = RngStream::new(0x54, b as u64);
        let v = verify_es(&p, &c, b, 100, 3.0, EsMode::Exhaustive, &mut rng)?;
        checks.push(Check::new(
            format!("ES bound, b={b}"),
            v <= 1e-9,
            format!("A = {:.4}, C = {:.4}, max violation {v:.3e}", c.a, c.c),
        ));
        let mut rng = RngStream::new(0x54, b as u64);
        let halved = c.with_a(c.a / 2.0);
        control_worst = control_worst.max(verify_es(&p, &halved, b, 100, 3.0, EsMode::Exhaustive, &mut rng)?);
    }
    checks.push(Check::new(
        "falsification control (A halved) is violated",
        control_worst > 0.0,
        format!("max violation {control_worst:.3e}"),
    ));
    Ok(checks)
}

fn threshold() -> Result<Vec<Check>> {
    let mut rng = RngStream::new(0x55, 0);
    let mut flips = 0;
    for _ in 0..50 {
        let l = 3.0 * rng.uniform();
        let l2 = 3.0 * rng.uniform();
        let mut s = SmoothnessProfile::with_quadratic_coupling(1.0, vec![1.0], l2, 0.0, vec![0.0]);
        s.weak_convexity = l;
        let g = gamma_threshold(l, l2)?;
        let below = splitting_constants(0.9 * g, &s)?;
        let above = splitting_constants(1.1 * g, &s)?;
        if below.k1 > 0.0 && above.k1 < 0.0 {
            flips += 1;
        }
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - 24.0 * mid - 5.0 * mid * mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g11 = gamma_threshold(1.0, 1.0)?;
    Ok(vec![
        Check::new(
            "K1 changes sign at the threshold (50 profiles)",
            flips == 50,
            format!("{flips}/50 profiles"),
        ),
        Check::new(
            "threshold at l = L2* = 1 matches bisection",
            (g11 - lo).abs() <= 1e-10,
            format!("analytic {g11:.10}, bisection {lo:.10}"),
        ),
    ])
}

fn fd_error(p: &ProblemInstance, points: &[Vec<f64>]) -> Result<f64> {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for y in points {
        let g = full_gradient_g(p, y)?;
        for j in 0..y.len() {
            let mut a = y.clone();
            let mut b = y.clone();
            a[j] += h;
            b[j] -= h;
            let fd = (p.value_g(&a) - p.value_g(&b)) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
        }
    }
    Ok(worst)
}

fn gradient_gap_violations(p: &ProblemInstance, rng: &mut RngStream) -> usize {
    let s = p.smoothness();
    let mut bad = 0;
    for _ in 0..1000 {
        let y = uniform_vec(p.dim_y(), 5.0, rng);
        for i in 0..p.n_components() {
            let lhs = linalg::norm_sq(&p.component_gradient(i, &y));
            let rhs = 2.0 * s.l1_components[i] * (p.component_value(i, &y) - s.gi_inf[i]);
            if lhs > rhs + 1e-9 {
                bad += 1;
            }
        }
    }
    bad
}

fn gradients() -> Result<Vec<Check>> {
    let mut rng = RngStream::new(0x56, 0);
    let ls = make_least_squares(10, 5, 1.0, 0.5, NonsmoothTerm::Zero, &mut rng)?;
    let lg = make_logistic(10, 5, 1.0, NonsmoothTerm::Zero, &mut rng)?;
    let pts: Vec<Vec<f64>> = (0..100).map(|_| uniform_vec(5, 3.0, &mut rng)).collect();
    let e_ls = fd_error(&ls, &pts)?;
    let e_lg = fd_error(&lg, &pts)?;

    let data = make_blobs(4, 2, 2, 3.0, &mut rng)?;
    let spec = MlpSpec::new(vec![2, 4, 2], Activation::Relu, Loss::SoftmaxCrossEntropy)?;
    let mlp = make_mlp_problem(spec.clone(), data, 1.0, 1.0, true)?;
    let net_pts: Vec<Vec<f64>> = (0..20).map(|_| spec.init_params(1.0, &mut rng)).collect();
    let e_mlp = fd_error(&mlp, &net_pts)?;

    let v_ls = gradient_gap_violations(&ls, &mut rng);
    let v_lg = gradient_gap_violations(&lg, &mut rng);
    Ok(vec![
        Check::new("least squares gradient vs central differences", e_ls <= 1e-5, format!("max rel error {e_ls:.3e}")),
        Check::new("logistic gradient vs central differences", e_lg <= 1e-5, format!("max rel error {e_lg:.3e}")),
        Check::new("2-4-2 network gradient vs central differences", e_mlp <= 1e-4, format!("max rel error {e_mlp:.3e}")),
        Check::new("gradient-gap inequality, least squares", v_ls == 0, format!("{v_ls} violations")),
        Check::new("gradient-gap inequality, logistic", v_lg == 0, format!("{v_lg} violations")),
    ])
}
