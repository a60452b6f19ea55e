//! Explicit distance and diameter bounds, the auxiliary function `H`, and
//! end-to-end certificates comparing bounds against measured distances.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::curvature::{curvature_profile, Curvature, CurvatureProfile, DEFAULT_TAU_CD};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::local::Dimension;
use crate::metric::{
    diameter_under, huang_metric, intrinsic_check, rho_distance_to_set,
    scaled_combinatorial_metric, MetricKind, MetricTable,
};
use crate::quadrature::adaptive_simpson;

/// Slack on `empirical ≤ bound`.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Prefactor in the tube radii.
pub const TUBE_CONSTANT: f64 = 18.2;
/// Rounded prefactor of the corollary, dominating `18.2·√2`.
pub const COROLLARY_CONSTANT: f64 = 26.0;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// `H(K, K₀, T) = 2(K₀+K) e^{2K₀T} ∫₀ᵀ e^{-2(K₀+K)s} (s√K₀ + √(2s)) ds`.
///
/// Substituting `s = u²` removes the `√s` singularity of the derivative at 0.
pub fn h_function(k: f64, k0: f64, horizon: f64) -> Result<f64> {
    positive("K", k)?;
    positive("T", horizon)?;
    if !(k0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "K0 must be nonnegative, got {k0}"
        )));
    }
    let a = k + k0;
    let root_k0 = k0.sqrt();
    let integrand = |u: f64| {
        (-2.0 * a * u * u).exp() * (u * u * root_k0 + std::f64::consts::SQRT_2 * u) * 2.0 * u
    };
    // the full half-line integral sets the error scale
    let scale = 0.25 * (root_k0 / (a * a) + PI.sqrt() / a.powf(1.5));
    let integral = adaptive_simpson(integrand, 0.0, horizon.sqrt(), 1e-13 * scale);
    Ok(2.0 * a * (2.0 * k0 * horizon).exp() * integral)
}

/// Closed-form upper estimate `e^{2K₀T}·½(√K₀/(K₀+K) + √(π/(K₀+K)))` of `H`.
pub fn h_upper_estimate(k: f64, k0: f64, horizon: f64) -> f64 {
    let a = k + k0;
    (2.0 * k0 * horizon).exp() * 0.5 * (k0.sqrt() / a + (PI / a).sqrt())
}

/// `H(K, K₀, t) ≤ e^{2K₀(t-T)} H(K, K₀, T)` for `0 < t < T`, with `1e-9` relative slack.
pub fn h_ratio_check(k: f64, k0: f64, t: f64, horizon: f64) -> Result<bool> {
    positive("t", t)?;
    if !(t < horizon) {
        return Err(Error::InvalidParameter(format!(
            "need t < T, got t={t}, T={horizon}"
        )));
    }
    let lhs = h_function(k, k0, t)?;
    let rhs = (2.0 * k0 * (t - horizon)).exp() * h_function(k, k0, horizon)?;
    Ok(lhs <= rhs * (1.0 + 1e-9))
}

/// Diameter bound for `N = ∞`, `V₀ = ∅`: `2√(2 Deg_max) / K₀`.
pub fn bound_case_i(deg_max: f64, k0: f64) -> Result<f64> {
    positive("Deg_max", deg_max)?;
    positive("K0", k0)?;
    Ok(2.0 * (2.0 * deg_max).sqrt() / k0)
}

/// Diameter bound for finite `N`, `V₀ = ∅`: `π√(N / K₀)`.
pub fn bound_case_ii(n: f64, k0: f64) -> Result<f64> {
    positive("N", n)?;
    positive("K0", k0)?;
    if !n.is_finite() {
        return Err(Error::InvalidParameter("N must be finite".into()));
    }
    Ok(PI * (n / k0).sqrt())
}

/// Combinatorial tube radius for `N = ∞`: `1 + 18.2√2 e^{4K₀/K} Deg_max / √(K K₀)`.
pub fn bound_case_iii(deg_max: f64, k: f64, k0: f64) -> Result<f64> {
    positive("Deg_max", deg_max)?;
    positive("K", k)?;
    positive("K0", k0)?;
    Ok(1.0
        + TUBE_CONSTANT * std::f64::consts::SQRT_2 * (4.0 * k0 / k).exp() * deg_max
            / (k * k0).sqrt())
}

/// Rounded variant `1 + 26 e^{4K₀/K} Deg_max / √(K K₀)`.
pub fn bound_corollary(deg_max: f64, k: f64, k0: f64) -> Result<f64> {
    positive("Deg_max", deg_max)?;
    positive("K", k)?;
    positive("K0", k0)?;
    Ok(1.0 + COROLLARY_CONSTANT * (4.0 * k0 / k).exp() * deg_max / (k * k0).sqrt())
}

/// Intrinsic tube radius for finite `N`: `R_ρ + 18.2 e^{2K₀/K} √(N / (K + K₀))`.
pub fn bound_case_iv(r_rho: f64, n: f64, k: f64, k0: f64) -> Result<f64> {
    positive("R_rho", r_rho)?;
    positive("N", n)?;
    positive("K", k)?;
    positive("K0", k0)?;
    if !n.is_finite() {
        return Err(Error::InvalidParameter("N must be finite".into()));
    }
    Ok(case_iv_radius(r_rho, n, k, k0))
}

// also evaluated at K₀ = 0, the limit of admissible constants
fn case_iv_radius(r_rho: f64, n: f64, k: f64, k0: f64) -> f64 {
    r_rho + TUBE_CONSTANT * (2.0 * k0 / k).exp() * (n / (k + k0)).sqrt()
}

/// Horizons `T·K` of the default radius sweep; the theorem uses `T = 1/K`.
pub const SWEEP_HORIZONS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
/// Factors `c` in `R = c·√N·H(K, K₀, T)` of the default sweep; the theorem uses 4.
pub const SWEEP_FACTORS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Tube radius `r + R_ρ + R` for finite `N` before the closed-form estimates,
/// with `r` bounded by
/// `2∫₀ᵀ √(e^{-2Kt} + (√N/R)H(t)) √(KN/(1-e^{-2Kt})) dt / (1 - √(e^{-2KT} + (√N/R)H(T)))`.
///
/// `None` when the denominator is not positive.
pub fn tube_radius_at(
    r_rho: f64,
    n: f64,
    k: f64,
    k0: f64,
    horizon: f64,
    radius: f64,
) -> Result<Option<f64>> {
    positive("N", n)?;
    positive("K", k)?;
    positive("T", horizon)?;
    positive("R", radius)?;
    if !n.is_finite() {
        return Err(Error::InvalidParameter("N must be finite".into()));
    }
    if !(r_rho >= 0.0 && k0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need R_rho >= 0 and K0 >= 0, got {r_rho}, {k0}"
        )));
    }
    let weight = n.sqrt() / radius;
    let h = |t: f64| {
        if t > 0.0 {
            h_function(k, k0, t)
        } else {
            Ok(0.0)
        }
    };
    let denominator = 1.0 - ((-2.0 * k * horizon).exp() + weight * h(horizon)?).sqrt();
    if !(denominator > 0.0) {
        return Ok(None);
    }
    // t = u², so that the 1/√t singularity at 0 becomes the finite factor 2u/√(1 - e^{-2Ku²})
    let integrand = |u: f64| {
        let t = u * u;
        let jacobian = if u > 0.0 {
            2.0 * u / (-(-2.0 * k * t).exp_m1()).sqrt()
        } else {
            (2.0 / k).sqrt()
        };
        let h_t = h(t).unwrap_or(f64::NAN);
        jacobian * ((-2.0 * k * t).exp() + weight * h_t).sqrt() * (k * n).sqrt()
    };
    let scale = (2.0 * n * horizon).sqrt();
    let integral = adaptive_simpson(integrand, 0.0, horizon.sqrt(), 1e-10 * scale);
    if integral.is_nan() {
        return Err(Error::InvalidParameter(
            "radius integrand is undefined".into(),
        ));
    }
    Ok(Some(2.0 * integral / denominator + r_rho + radius))
}

/// One point of [`radius_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// `None` where the estimate degenerates.
    pub tube_radius: Option<f64>,
}

/// Evaluates [`tube_radius_at`] over `T = h/K` for `h` in `horizons` and
/// `R = c·√N·H(K, K₀, T)` for `c` in `factors`.
pub fn radius_sweep(
    r_rho: f64,
    n: f64,
    k: f64,
    k0: f64,
    horizons: &[f64],
    factors: &[f64],
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(horizons.len() * factors.len());
    for &h in horizons {
        let horizon = h / k;
        let base = n.sqrt() * h_function(k, k0, horizon)?;
        for &c in factors {
            let radius = c * base;
            out.push(SweepPoint {
                horizon,
                radius,
                tube_radius: tube_radius_at(r_rho, n, k, k0, horizon, radius)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateCase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
    #[serde(rename = "iv")]
    Iv,
    #[serde(rename = "corollary")]
    Corollary,
    #[serde(rename = "vacuous")]
    Vacuous,
}

impl fmt::Display for CertificateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::I => "i",
            Self::Ii => "ii",
            Self::Iii => "iii",
            Self::Iv => "iv",
            Self::Corollary => "corollary",
            Self::Vacuous => "vacuous",
        })
    }
}

/// Distance quantity at one vertex and its slack against the bound.
#[derive(Debug, Clone, Serialize)]
pub struct VertexSlack {
    pub vertex: String,
    /// Eccentricity for the diameter cases, distance to `V₀` for the tube cases.
    pub distance: f64,
    pub slack: f64,
}

/// Machine-readable record of one theorem check.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub case: CertificateCase,
    pub graph: String,
    #[serde(rename = "N")]
    pub dimension: Dimension,
    pub metric: MetricKind,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "K0")]
    pub k0: Option<f64>,
    pub deg_max: f64,
    pub r_rho: Option<f64>,
    pub bound: Option<f64>,
    pub empirical: Option<f64>,
    pub slack: Option<f64>,
    pub pass: bool,
    pub decisions: serde_json::Value,
    #[serde(skip)]
    pub per_vertex: Vec<VertexSlack>,
}

impl Certificate {
    /// `vertex,distance,slack` rows with a header line.
    pub fn slack_csv(&self) -> String {
        let mut out = String::from("vertex,distance,slack\n");
        for row in &self.per_vertex {
            out.push_str(&format!("{},{},{}\n", row.vertex, row.distance, row.slack));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub tau_cd: f64,
    /// Certify the tube case for `N = ∞` with the rounded corollary constant.
    pub corollary: bool,
    /// Required for [`MetricKind::Custom`].
    pub custom_table: Option<MetricTable>,
    /// Record a `(T, R)` sweep of the finite-`N` tube radius in the decisions.
    pub sweep: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tau_cd: DEFAULT_TAU_CD,
            corollary: false,
            custom_table: None,
            sweep: false,
        }
    }
}

fn metric_table(g: &WeightedGraph, kind: MetricKind, opts: &CheckOptions) -> Result<MetricTable> {
    match kind {
        MetricKind::Huang => huang_metric(g),
        MetricKind::ScaledCombinatorial => scaled_combinatorial_metric(g),
        MetricKind::Custom => opts
            .custom_table
            .clone()
            .ok_or_else(|| Error::InvalidParameter("custom metric needs a table".into())),
        MetricKind::Resistance => Err(Error::InvalidParameter(
            "the resistance metric is not intrinsic in general; pick huang, scaled-combinatorial or custom".into(),
        )),
    }
}

/// Runs the distance/diameter theorem on `g` with the tightest constants
/// read off the curvature profile, choosing the case from `V₀` and `N`.
pub fn check_main_theorem(
    g: &WeightedGraph,
    graph_name: &str,
    dimension: Dimension,
    metric: MetricKind,
    opts: &CheckOptions,
) -> Result<Certificate> {
    g.require_connected()?;
    let profile = curvature_profile(g, dimension, opts.tau_cd)?;
    check_with_profile(g, graph_name, &profile, metric, opts)
}

/// Same as [`check_main_theorem`] for an already computed profile.
pub fn check_with_profile(
    g: &WeightedGraph,
    graph_name: &str,
    profile: &CurvatureProfile,
    metric: MetricKind,
    opts: &CheckOptions,
) -> Result<Certificate> {
    let dimension = profile.dimension;
    let deg_max = g.max_degree()?;
    let mut table = metric_table(g, metric, opts)?;
    let margin = intrinsic_check(g, &mut table)?;
    let mut failures: Vec<String> = Vec::new();
    if !table.is_intrinsic() {
        failures.push(format!(
            "metric {metric} is not intrinsic (margin {margin})"
        ));
    }
    let mut decisions = json!({
        "tau_cd": opts.tau_cd,
        "constants": "K = min curvature off V0, K0 from max(0, -min curvature)",
        "intrinsic_margin": margin,
        "v0": profile.v0.names(g),
        "certificate_slack": CERTIFICATE_SLACK,
    });

    let mut cert = Certificate {
        case: CertificateCase::Vacuous,
        graph: graph_name.to_string(),
        dimension,
        metric,
        k: None,
        k0: None,
        deg_max,
        r_rho: None,
        bound: None,
        empirical: None,
        slack: None,
        pass: true,
        decisions: serde_json::Value::Null,
        per_vertex: Vec::new(),
    };

    if profile.is_v0_everything() {
        decisions["note"] = json!("V0 = V: theorem vacuous");
        cert.decisions = decisions;
        return Ok(cert);
    }
    let k_pos = match profile.k_pos.expect("V0 != V") {
        Curvature::Finite(k) => k,
        Curvature::PlusInfinity => {
            return Err(Error::InvalidParameter(
                "graph has no edges to certify".into(),
            ));
        }
    };

    let n = g.len();
    let (bound, per_vertex_distance): (f64, Vec<f64>) = if profile.v0.is_empty() {
        // diameter cases, CD(K0, N) with K0 the global minimum
        let k0 = k_pos;
        cert.k0 = Some(k0);
        let bound = match dimension {
            Dimension::Infinite => {
                cert.case = CertificateCase::I;
                bound_case_i(deg_max, k0)?
            }
            Dimension::Finite(nv) => {
                cert.case = CertificateCase::Ii;
                bound_case_ii(nv, k0)?
            }
        };
        let ecc = (0..n)
            .map(|x| table.row(x).iter().copied().fold(0.0, f64::max))
            .collect();
        cert.empirical = Some(diameter_under(g, &table)?);
        (bound, ecc)
    } else {
        let k = k_pos;
        cert.k = Some(k);
        match dimension {
            Dimension::Infinite => {
                // R(K0) falls until K0 = K/8 and rises after; any K0 ≥ K_neg is admissible
                let k0 = profile.k_neg.max(k / 8.0);
                decisions["k0_choice"] = json!(if profile.k_neg >= k / 8.0 {
                    "profile"
                } else {
                    "raised to K/8, the minimiser of the radius over admissible K0"
                });
                decisions["k_neg"] = json!(profile.k_neg);
                cert.k0 = Some(k0);
                let exact = bound_case_iii(deg_max, k, k0)?;
                let rounded = bound_corollary(deg_max, k, k0)?;
                decisions["theorem_radius"] = json!(exact);
                decisions["corollary_radius"] = json!(rounded);
                decisions["distance"] = json!("combinatorial");
                cert.case = if opts.corollary {
                    CertificateCase::Corollary
                } else {
                    CertificateCase::Iii
                };
                let dist: Vec<f64> = (0..n)
                    .map(|x| {
                        let hops = g.hop_distances_from(x).expect("valid vertex");
                        profile
                            .v0
                            .iter()
                            .map(|&v| hops[v].expect("connected") as f64)
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                let rho_dist: Vec<f64> = (0..n)
                    .map(|x| rho_distance_to_set(g, &table, x, &profile.v0).expect("non-empty"))
                    .collect();
                decisions["max_rho_distance_to_v0"] =
                    json!(rho_dist.iter().copied().fold(0.0, f64::max));
                cert.empirical = Some(dist.iter().copied().fold(0.0, f64::max));
                (if opts.corollary { rounded } else { exact }, dist)
            }
            Dimension::Finite(nv) => {
                cert.case = CertificateCase::Iv;
                let k0 = profile.k_neg;
                cert.k0 = Some(k0);
                let r_rho = table.jump_size;
                cert.r_rho = Some(r_rho);
                if !(r_rho > 0.0) {
                    failures.push("jump size must be positive".into());
                }
                let bound = if k0 > 0.0 {
                    decisions["k0_choice"] = json!("profile");
                    bound_case_iv(r_rho, nv, k, k0)?
                } else {
                    decisions["k0_choice"] = json!("K0 -> 0 limit (no negative curvature present)");
                    case_iv_radius(r_rho, nv, k, 0.0)
                };
                if opts.sweep {
                    let points = radius_sweep(r_rho, nv, k, k0, &SWEEP_HORIZONS, &SWEEP_FACTORS)?;
                    let best = points
                        .iter()
                        .filter_map(|p| p.tube_radius)
                        .fold(f64::INFINITY, f64::min);
                    decisions["radius_sweep"] = json!(points);
                    decisions["radius_sweep_best"] = json!(best);
                }
                let dist: Vec<f64> = (0..n)
                    .map(|x| rho_distance_to_set(g, &table, x, &profile.v0).expect("non-empty"))
                    .collect();
                cert.empirical = Some(dist.iter().copied().fold(0.0, f64::max));
                (bound, dist)
            }
        }
    };

    cert.bound = Some(bound);
    let empirical = cert.empirical.expect("set above");
    cert.slack = Some(bound - empirical);
    cert.per_vertex = per_vertex_distance
        .iter()
        .enumerate()
        .map(|(x, &d)| VertexSlack {
            vertex: g.id(x).to_string(),
            distance: d,
            slack: bound - d,
        })
        .collect();
    decisions["hypothesis_failures"] = json!(failures);
    cert.pass = failures.is_empty() && empirical <= bound + CERTIFICATE_SLACK;
    cert.decisions = decisions;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, MeasureMode};

    #[test]
    fn theorem_point_of_the_sweep() {
        // at T = 1/K, R = 4√N·H the unsimplified radius sits below the closed form
        for (k, k0, n) in [(1.0f64, 0.5, 5.0f64), (0.5, 0.0, 2.0), (2.0, 3.0, 10.0)] {
            let horizon = 1.0 / k;
            let radius = 4.0 * n.sqrt() * h_function(k, k0, horizon).unwrap();
            let fine = tube_radius_at(0.3, n, k, k0, horizon, radius)
                .unwrap()
                .unwrap();
            assert!(fine <= case_iv_radius(0.3, n, k, k0), "{fine}");
            assert!(fine > 0.3 + radius);
        }
        // R too small for the gradient term to stay below one
        assert_eq!(tube_radius_at(0.0, 5.0, 1.0, 1.0, 1.0, 1e-3).unwrap(), None);
        let points = radius_sweep(0.3, 5.0, 1.0, 0.5, &SWEEP_HORIZONS, &SWEEP_FACTORS).unwrap();
        assert_eq!(points.len(), 25);
    }

    #[test]
    fn h_half_line_limit() {
        let h = h_function(1.0, 0.0, 50.0).unwrap();
        assert!((h - PI.sqrt() / 2.0).abs() < 1e-10, "{h}");
    }

    #[test]
    fn h_monotone_and_estimates() {
        assert!(h_function(1.0, 0.5, 1.0).unwrap() < h_function(1.0, 0.5, 2.0).unwrap());
        assert!(h_function(1.0, 1.0, 1.0).unwrap() <= h_upper_estimate(1.0, 1.0, 1.0));
        assert!(h_ratio_check(1.0, 1.0, 0.5, 1.0).unwrap());
        assert!(h_ratio_check(1.0, 0.0, 0.5, 1.0).unwrap());
        assert!(h_ratio_check(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(h_function(0.0, 1.0, 1.0).is_err());
        assert!(h_function(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn formula_instances() {
        assert_eq!(bound_case_i(2.0, 1.0).unwrap(), 4.0);
        assert!((bound_case_ii(4.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((bound_case_ii(3.0, 3.0).unwrap() - PI).abs() < 1e-15);
        let e4 = 4.0f64.exp();
        let iii = bound_case_iii(1.0, 1.0, 1.0).unwrap();
        assert!((iii - (1.0 + 18.2 * 2.0f64.sqrt() * e4)).abs() < 1e-9);
        assert!((iii - 1406.3).abs() < 0.1);
        let cor = bound_corollary(1.0, 1.0, 1.0).unwrap();
        assert!((cor - (1.0 + 26.0 * e4)).abs() < 1e-9);
        assert!((cor - 1420.55).abs() < 0.01);
        let iv = bound_case_iv(1.0, 1.0, 1.0, 1.0).unwrap();
        // 1 + 18.2·e²·√(1/2)
        assert!((iv - (1.0 + 18.2 * 2.0f64.exp() * 0.5f64.sqrt())).abs() < 1e-12);
        assert!((iv - 96.09).abs() < 0.01, "{iv}");
        assert!(bound_case_i(0.0, 1.0).is_err());
        assert!(bound_case_ii(f64::INFINITY, 1.0).is_err());
        assert!(bound_case_iv(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn e2_case_ii() {
        let g = generate(Family::Path(2), MeasureMode::Counting).unwrap();
        let c = check_main_theorem(
            &g,
            "path:2",
            Dimension::Finite(2.0),
            MetricKind::Huang,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(c.case, CertificateCase::Ii);
        assert!((c.k0.unwrap() - 1.0).abs() < 1e-12);
        assert!(c.pass);
    }

    #[test]
    fn vacuous_when_everything_flat() {
        let g = generate(Family::Path(2), MeasureMode::Counting).unwrap();
        let c = check_main_theorem(
            &g,
            "path:2",
            Dimension::Finite(1.0),
            MetricKind::Huang,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(c.case, CertificateCase::Vacuous);
        assert!(c.pass && c.bound.is_none());
    }

    #[test]
    fn resistance_is_rejected_as_theorem_metric() {
        let g = generate(Family::Path(3), MeasureMode::Counting).unwrap();
        assert!(check_main_theorem(
            &g,
            "p",
            Dimension::Infinite,
            MetricKind::Resistance,
            &CheckOptions::default()
        )
        .is_err());
    }
}
