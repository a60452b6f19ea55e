//! Heat semigroup `P_t = e^{tΔ}` via the spectral decomposition of the
//! symmetrised operator `M^{1/2} Δ M^{-1/2}`, and residual checks of the
//! gradient estimates for `P_t`.
//!
//! Kernel convention: `P_t f(x) = Σ_y p(t, x, y) f(y) m(y)`. With this
//! convention `p` is symmetric and `Σ_y p(t, x, y) m(y) = 1`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::curvature::CurvatureProfile;
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::linalg::symmetric_eigen;
use crate::local::{gamma, laplacian, Dimension};
use crate::metric::{intrinsic_check, rho_distance_to_set, MetricTable};
use crate::quadrature::{composite_simpson, CompositeOptions};

/// Absolute part of every residual tolerance.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Eigenvalues of `Δ`, descending (the first is 0 on a connected graph).
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrised operator, as columns.
    pub eigenvectors: DMatrix<f64>,
    pub measure_roots: Vec<f64>,
}

pub fn spectral_decompose(g: &WeightedGraph) -> Result<SpectralData> {
    g.require_connected()?;
    let n = g.len();
    let roots: Vec<f64> = g.measures().iter().map(|m| m.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        let mut row_sum = 0.0;
        for &(y, w) in g.neighbors(x) {
            a[(x, y)] = w / (roots[x] * roots[y]);
            row_sum += w;
        }
        a[(x, x)] = -row_sum / g.measure(x);
    }
    let eig = symmetric_eigen(&a);
    // reverse to descending order
    let eigenvalues: Vec<f64> = eig.values.iter().rev().copied().collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.vectors[(r, n - 1 - c)]);
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        measure_roots: roots,
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Applies `φ(Δ)` for a scalar function `φ` of the eigenvalues.
    pub fn apply_function(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let h = DVector::from_iterator(n, f.iter().zip(&self.measure_roots).map(|(v, r)| v * r));
        let mut c = self.eigenvectors.tr_mul(&h);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= phi(self.eigenvalues[k]);
        }
        let out = &self.eigenvectors * c;
        out.iter()
            .zip(&self.measure_roots)
            .map(|(v, r)| v / r)
            .collect()
    }

    /// Coefficients `a_k` with `P_s f(x) = Σ_k a_k e^{λ_k s}`.
    pub fn modal_coefficients(&self, f: &[f64], x: usize) -> Vec<f64> {
        let n = self.len();
        let h = DVector::from_iterator(n, f.iter().zip(&self.measure_roots).map(|(v, r)| v * r));
        let c = self.eigenvectors.tr_mul(&h);
        (0..n)
            .map(|k| self.eigenvectors[(x, k)] * c[k] / self.measure_roots[x])
            .collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )))
    }
}

fn check_function(g: &WeightedGraph, f: &[f64]) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::InvalidParameter(format!(
            "function has {} values for {} vertices",
            f.len(),
            g.len()
        )));
    }
    Ok(())
}

/// `P_t f`. `t = 0` returns `f` unchanged.
pub fn semigroup_apply(
    g: &WeightedGraph,
    sd: &SpectralData,
    t: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    check_time(t)?;
    check_function(g, f)?;
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    Ok(sd.apply_function(|lambda| (t * lambda).exp(), f))
}

/// Heat kernel `p(t, x, y)` for `t > 0`.
pub fn heat_kernel(
    g: &WeightedGraph,
    sd: &SpectralData,
    t: f64,
    x: usize,
    y: usize,
) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "heat kernel needs t > 0, got {t}"
        )));
    }
    let s: f64 = (0..sd.len())
        .map(|k| sd.eigenvectors[(x, k)] * (t * sd.eigenvalues[k]).exp() * sd.eigenvectors[(y, k)])
        .sum();
    Ok(s / (sd.measure_roots[x] * sd.measure_roots[y]))
}

/// Transition probability `p(t, x, y) m(y)`, the `(x, y)` entry of `e^{tΔ}`.
pub fn transition_probability(
    g: &WeightedGraph,
    sd: &SpectralData,
    t: f64,
    x: usize,
    y: usize,
) -> Result<f64> {
    Ok(heat_kernel(g, sd, t, x, y)? * g.measure(y))
}

/// One row of a verifier report.
#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub check: String,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub residual: f64,
    /// Pass threshold: `residual ≥ -tolerance`.
    pub tolerance: f64,
    pub pass: bool,
}

impl Residual {
    fn new(check: &str, params: serde_json::Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = rhs - lhs;
        Self {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual >= -tolerance,
        }
    }
}

fn scale(lhs: f64, rhs: f64) -> f64 {
    1.0 + lhs.abs() + rhs.abs()
}

// (1 - e^{-2Kt}) / K, continuous through K = 0
fn decay_factor(k: f64, t: f64) -> f64 {
    if k == 0.0 {
        2.0 * t
    } else {
        -(-2.0 * k * t).exp_m1() / k
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Checks `Γ P_t f(x) ≤ e^{-2Kt} P_t Γf(x) - (1 - e^{-2Kt})/(KN) (Δ P_t f)²(x)`
/// under `CD(K, N)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_gradient_bound(
    g: &WeightedGraph,
    sd: &SpectralData,
    profile: &CurvatureProfile,
    k: f64,
    f: &[f64],
    t: f64,
    x: usize,
) -> Result<Residual> {
    g.check_vertex(x)?;
    check_time(t)?;
    check_function(g, f)?;
    let min = profile.min_value().as_f64();
    if !(k <= min + profile.tau_cd) {
        return Err(Error::Hypothesis(format!(
            "CD({k}, {}) fails: minimum curvature is {min}",
            profile.dimension
        )));
    }
    let pf = semigroup_apply(g, sd, t, f)?;
    let gamma_f: Vec<f64> = (0..g.len()).map(|v| gamma(g, f, f, v)).collect();
    let p_gamma = semigroup_apply(g, sd, t, &gamma_f)?;
    let lhs = gamma(g, &pf, &pf, x);
    let lap = laplacian(g, &pf, x);
    let rhs = (-2.0 * k * t).exp() * p_gamma[x]
        - decay_factor(k, t) * profile.dimension.reciprocal() * lap * lap;
    let params = json!({"K": k, "N": profile.dimension, "t": t, "x": g.id(x)});
    Ok(Residual::new(
        "lmp16",
        params,
        lhs,
        rhs,
        RESIDUAL_TOL * scale(lhs, rhs),
    ))
}

/// Checks the refined estimate with the correction term
/// `2(K₀+K)‖Γf‖∞ e^{2K₀T} ∫₀ᵀ e^{-2(K+K₀)s} P_s 1_{V₀}(x) ds`.
#[allow(clippy::too_many_arguments)]
pub fn verify_refined_gradient_bound(
    g: &WeightedGraph,
    sd: &SpectralData,
    profile: &CurvatureProfile,
    k: f64,
    k0: f64,
    f: &[f64],
    horizon: f64,
    x: usize,
) -> Result<Residual> {
    g.check_vertex(x)?;
    check_time(horizon)?;
    check_function(g, f)?;
    if !(k > 0.0 && k0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need K > 0 and K0 >= 0, got K={k}, K0={k0}"
        )));
    }
    let min = profile.min_value().as_f64();
    if !(-k0 <= min + profile.tau_cd) {
        return Err(Error::Hypothesis(format!(
            "CD(-{k0}, {}) fails: minimum curvature is {min}",
            profile.dimension
        )));
    }
    if let Some(kp) = profile.k_pos {
        let kp = kp.as_f64();
        if !(k <= kp + profile.tau_cd) {
            return Err(Error::Hypothesis(format!(
                "CD({k}) fails off V0: minimum there is {kp}"
            )));
        }
    }

    let pf = semigroup_apply(g, sd, horizon, f)?;
    let gamma_f: Vec<f64> = (0..g.len()).map(|v| gamma(g, f, f, v)).collect();
    let p_gamma = semigroup_apply(g, sd, horizon, &gamma_f)?;
    let lhs = gamma(g, &pf, &pf, x);
    let lap = laplacian(g, &pf, x);
    let base = (-2.0 * k * horizon).exp() * p_gamma[x]
        - decay_factor(k, horizon) * profile.dimension.reciprocal() * lap * lap;

    let (integral, quad_error) = v0_occupation_integral(sd, &profile.v0, x, k + k0, horizon);
    let coefficient = 2.0 * (k0 + k) * sup_norm(&gamma_f) * (2.0 * k0 * horizon).exp();
    let rhs = base + coefficient * integral;
    let tolerance = (coefficient * quad_error + RESIDUAL_TOL) * scale(lhs, rhs);
    let params = json!({
        "K": k, "K0": k0, "N": profile.dimension, "T": horizon, "x": g.id(x),
        "v0_size": profile.v0.len(), "integral": integral, "quadrature_error": quad_error,
    });
    Ok(Residual::new("sgc", params, lhs, rhs, tolerance))
}

/// `∫₀ᵀ e^{-2 rate s} P_s 1_{V₀}(x) ds` by composite Simpson, with its error estimate.
pub fn v0_occupation_integral(
    sd: &SpectralData,
    v0: &VertexSet,
    x: usize,
    rate: f64,
    horizon: f64,
) -> (f64, f64) {
    if v0.is_empty() || horizon == 0.0 {
        return (0.0, 0.0);
    }
    let coeffs = sd.modal_coefficients(&v0.indicator(sd.len()), x);
    let integrand = |s: f64| {
        let occupation: f64 = coeffs
            .iter()
            .zip(&sd.eigenvalues)
            .map(|(a, l)| a * (l * s).exp())
            .sum();
        (-2.0 * rate * s).exp() * occupation
    };
    let q = composite_simpson(integrand, 0.0, horizon, CompositeOptions::default());
    (q.value, q.error)
}

/// Checks `P_t 1_W(x) ≤ (√N / R)(t√K₀ + √(2t))` for `ρ(x, W) ≥ R` under `CD(-K₀, N)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_pt1(
    g: &WeightedGraph,
    sd: &SpectralData,
    profile: &CurvatureProfile,
    k0: f64,
    target: &VertexSet,
    x: usize,
    t: f64,
    radius: f64,
    metric: &MetricTable,
) -> Result<Residual> {
    g.check_vertex(x)?;
    check_time(t)?;
    let Dimension::Finite(n) = profile.dimension else {
        return Err(Error::Hypothesis(
            "the occupation bound needs CD(-K0, N) with finite N".into(),
        ));
    };
    if !(k0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "K0 must be nonnegative, got {k0}"
        )));
    }
    let min = profile.min_value().as_f64();
    if !(-k0 <= min + profile.tau_cd) {
        return Err(Error::Hypothesis(format!(
            "CD(-{k0}, {n}) fails: minimum curvature is {min}"
        )));
    }
    let margin = match metric.intrinsic_margin {
        Some(m) => m,
        None => intrinsic_check(g, &mut metric.clone())?,
    };
    if margin > 1.0 + crate::metric::INTRINSIC_SLACK {
        return Err(Error::Hypothesis(format!(
            "metric is not intrinsic (margin {margin})"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let actual = rho_distance_to_set(g, metric, x, target)?;
    if radius > actual + 1e-12 {
        return Err(Error::Precondition(format!(
            "R = {radius} exceeds rho(x, W) = {actual}"
        )));
    }
    let occupation = semigroup_apply(g, sd, t, &target.indicator(g.len()))?;
    let lhs = occupation[x];
    let rhs = n.sqrt() / radius * (t * k0.sqrt() + (2.0 * t).sqrt());
    let params = json!({"K0": k0, "N": n, "t": t, "R": radius, "x": g.id(x), "W": target.names(g)});
    Ok(Residual::new("pt1", params, lhs, rhs, RESIDUAL_TOL))
}
