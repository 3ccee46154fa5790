use serde::{Deserialize, Serialize};

/// Smoothness and lower-bound constants of a problem instance.
///
/// `l1` bounds the Lipschitz constant of the full gradient of `G`,
/// `l1_components[i]` that of each summand. The starred constants bound the
/// partial Lipschitz moduli of `H`: `l2_star` for `∇ₓH` in `x`, `l3_star` for
/// `∇ᵧH` in `y`, `l4_star` for `∇ₓH` in `y` and `l5_star` for `∇ᵧH` in `x`.
/// `weak_convexity` is a value `l` such that `H(·, y) + l/2 ‖·‖²` is convex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProfile {
    pub l1: f64,
    pub l1_components: Vec<f64>,
    /// False when `l1` is a declared estimate rather than an analytic bound.
    pub l1_analytic: bool,
    pub l2_star: f64,
    pub l3_star: f64,
    pub l4_star: f64,
    pub l5_star: f64,
    pub weak_convexity: f64,
    pub g_inf: f64,
    pub h_inf: f64,
    pub gh_inf: f64,
    pub gi_inf: Vec<f64>,
}

impl SmoothnessProfile {
    /// Profile for `H(x, y) = λ/2 ‖x − y‖²`, whose partial Hessians are all `λ·I`.
    pub fn with_quadratic_coupling(
        l1: f64,
        l1_components: Vec<f64>,
        lambda: f64,
        g_inf: f64,
        gi_inf: Vec<f64>,
    ) -> Self {
        SmoothnessProfile {
            l1,
            l1_components,
            l1_analytic: true,
            l2_star: lambda,
            l3_star: lambda,
            l4_star: lambda,
            l5_star: lambda,
            weak_convexity: 0.0,
            g_inf,
            h_inf: 0.0,
            // inf over x of H is 0 at x = y, so (G + H)^inf = G^inf.
            gh_inf: g_inf,
            gi_inf,
        }
    }

    /// `L = L1 + L3*`, the smallest constant allowed by the smoothness assumption.
    pub fn lipschitz_l(&self) -> f64 {
        self.l1 + self.l3_star
    }

    pub fn max_component_l1(&self) -> f64 {
        self.l1_components.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn rescale_coupling(&mut self, lambda: f64) {
        self.l2_star = lambda;
        self.l3_star = lambda;
        self.l4_star = lambda;
        self.l5_star = lambda;
    }
}
