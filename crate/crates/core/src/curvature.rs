//! Pointwise Bakry-Émery curvature `K_{G,x}(N)` and curvature profiles.
//!
//! `K_{G,x}(N)` is the largest `K` with `fᵀQf ≥ K·Γ(f)(x)` for all local `f`.
//! The 2-sphere coordinates only appear in `Q`, with a positive diagonal block,
//! so they are minimised out by a Schur complement; what remains is a standard
//! symmetric eigenproblem after congruence with `B^{-1/2}`.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::linalg::min_eigenvalue;
use crate::local::{local_forms, Dimension, LocalForms};

/// Default tolerance for the `K ≤ 0` classification and `CD` checks.
pub const DEFAULT_TAU_CD: f64 = 1e-8;

/// Extended-real curvature value. Isolated vertices carry `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Curvature {
    Finite(f64),
    PlusInfinity,
}

impl Curvature {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(k) => Some(k),
            Self::PlusInfinity => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(k) => k,
            Self::PlusInfinity => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(k) => write!(f, "{k}"),
            Self::PlusInfinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Curvature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(k) => s.serialize_f64(*k),
            Self::PlusInfinity => s.serialize_str("inf"),
        }
    }
}

/// Schur complement `Q11 - Q12 Q22⁻¹ Q12ᵀ` of the 2-sphere block.
pub fn schur_complement(forms: &LocalForms) -> Result<DMatrix<f64>> {
    let q11 = forms.q11();
    let q12 = forms.q12();
    let q22 = forms.q22();
    let n1 = forms.n1();
    let mut s = q11;
    for k in 0..forms.n2() {
        let d = q22[(k, k)];
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "2-sphere block entry {k} is {d} at vertex #{}",
                forms.center
            )));
        }
        for i in 0..n1 {
            for j in 0..n1 {
                s[(i, j)] -= q12[(i, k)] * q12[(j, k)] / d;
            }
        }
    }
    Ok(s)
}

/// Curvature from already assembled local forms.
pub fn curvature_from_forms(forms: &LocalForms) -> Result<Curvature> {
    if forms.n1() == 0 {
        return Ok(Curvature::PlusInfinity);
    }
    let s = schur_complement(forms)?;
    let scale: Vec<f64> = forms.b_diag.iter().map(|b| 1.0 / b.sqrt()).collect();
    let n1 = forms.n1();
    let c = DMatrix::from_fn(n1, n1, |i, j| scale[i] * s[(i, j)] * scale[j]);
    Ok(Curvature::Finite(min_eigenvalue(&c).expect("non-empty")))
}

/// `K_{G,x}(N) = sup{K : CD(K, N, x)}`.
pub fn curvature_at(g: &WeightedGraph, x: usize, dimension: Dimension) -> Result<Curvature> {
    curvature_from_forms(&local_forms(g, x, dimension)?)
}

/// Whether `CD(K, N, x)` holds, up to `tau_cd`.
pub fn cd_holds(
    g: &WeightedGraph,
    x: usize,
    k: f64,
    dimension: Dimension,
    tau_cd: f64,
) -> Result<bool> {
    Ok(match curvature_at(g, x, dimension)? {
        Curvature::PlusInfinity => true,
        Curvature::Finite(kx) => k <= kx + tau_cd,
    })
}

/// Curvatures at every vertex, the non-positively curved set and derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub dimension: Dimension,
    pub values: Vec<Curvature>,
    /// `{x : K_{G,x}(N) ≤ τ_cd}`.
    pub v0: VertexSet,
    /// Minimum curvature outside `v0`; `None` when `v0` is everything.
    pub k_pos: Option<Curvature>,
    /// `max(0, -min_x K_{G,x}(N))`.
    pub k_neg: f64,
    pub tau_cd: f64,
}

impl CurvatureProfile {
    pub fn min_value(&self) -> Curvature {
        self.values
            .iter()
            .copied()
            .fold(Curvature::PlusInfinity, Curvature::min)
    }

    pub fn is_v0_everything(&self) -> bool {
        self.v0.len() == self.values.len()
    }

    pub fn to_json(&self, g: &WeightedGraph) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry<'a> {
            vertex: &'a str,
            #[serde(rename = "K")]
            k: Curvature,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(rename = "N")]
            n: Dimension,
            values: Vec<Entry<'a>>,
            v0: Vec<String>,
            #[serde(rename = "K_pos")]
            k_pos: Option<Curvature>,
            #[serde(rename = "K_neg")]
            k_neg: f64,
        }
        let doc = Doc {
            n: self.dimension,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(x, &k)| Entry { vertex: g.id(x), k })
                .collect(),
            v0: self.v0.names(g),
            k_pos: self.k_pos,
            k_neg: self.k_neg,
        };
        serde_json::to_value(doc).expect("profile serialises")
    }
}

/// Curvature at every vertex (computed in parallel, merged in vertex order).
pub fn curvature_profile(
    g: &WeightedGraph,
    dimension: Dimension,
    tau_cd: f64,
) -> Result<CurvatureProfile> {
    g.require_connected()?;
    if !(tau_cd > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau_cd must be positive, got {tau_cd}"
        )));
    }
    let values: Vec<Curvature> = (0..g.len())
        .into_par_iter()
        .map(|x| curvature_at(g, x, dimension))
        .collect::<Result<_>>()?;
    Ok(profile_from_values(values, dimension, tau_cd))
}

pub(crate) fn profile_from_values(
    values: Vec<Curvature>,
    dimension: Dimension,
    tau_cd: f64,
) -> CurvatureProfile {
    let in_v0 = |k: &Curvature| matches!(k, Curvature::Finite(v) if *v <= tau_cd);
    let v0 = VertexSet::from_indices(
        values
            .iter()
            .enumerate()
            .filter(|(_, k)| in_v0(k))
            .map(|(x, _)| x),
    );
    let k_pos = values
        .iter()
        .filter(|k| !in_v0(k))
        .copied()
        .reduce(Curvature::min);
    let min = values
        .iter()
        .copied()
        .fold(Curvature::PlusInfinity, Curvature::min);
    let k_neg = match min {
        Curvature::Finite(k) => (-k).max(0.0),
        Curvature::PlusInfinity => 0.0,
    };
    CurvatureProfile {
        dimension,
        values,
        v0,
        k_pos,
        k_neg,
        tau_cd,
    }
}

/// Per-vertex outcome of [`dimension_shift_check`].
#[derive(Debug, Clone, Serialize)]
pub struct ShiftMargin {
    pub vertex: usize,
    pub k_infinite: f64,
    pub k_shifted: f64,
    /// `K(2 Deg_max / s) - (K(∞) - s)`.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionShiftReport {
    pub s: f64,
    pub shifted_dimension: f64,
    pub worst_margin: f64,
    pub margins: Vec<ShiftMargin>,
    pub pass: bool,
}

/// Checks `K_{G,x}(2·Deg_max/s) ≥ K_{G,x}(∞) - s` at every vertex.
pub fn dimension_shift_check(
    g: &WeightedGraph,
    s: f64,
    tau_cd: f64,
) -> Result<DimensionShiftReport> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "shift must be positive, got {s}"
        )));
    }
    let deg_max = g.max_degree()?;
    if deg_max == 0.0 {
        return Err(Error::EdgelessGraph);
    }
    let shifted = Dimension::finite(2.0 * deg_max / s)?;
    let mut margins = Vec::new();
    for x in 0..g.len() {
        let (Curvature::Finite(k_inf), Curvature::Finite(k_n)) = (
            curvature_at(g, x, Dimension::Infinite)?,
            curvature_at(g, x, shifted)?,
        ) else {
            continue;
        };
        margins.push(ShiftMargin {
            vertex: x,
            k_infinite: k_inf,
            k_shifted: k_n,
            margin: k_n - (k_inf - s),
        });
    }
    let worst_margin = margins
        .iter()
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    Ok(DimensionShiftReport {
        s,
        shifted_dimension: shifted.value(),
        worst_margin,
        pass: worst_margin >= -tau_cd,
        margins,
    })
}
