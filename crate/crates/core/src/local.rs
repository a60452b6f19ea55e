//! Pointwise Laplacian, carré du champ `Γ` and iterated form `Γ₂`, plus the
//! quadratic-form matrices of `Γ` and `Γ₂ - (1/N)(Δ·)²` localised at a vertex.
//!
//! All three operators are invariant under adding constants, so the local
//! matrices are written in the gauge `f(x) = 0`: the centre coordinate is
//! dropped and the forms live on the 1- and 2-spheres around `x`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Dimension parameter `N ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    pub fn finite(n: f64) -> Result<Self> {
        if n > 0.0 && n.is_finite() {
            Ok(Self::Finite(n))
        } else if n == f64::INFINITY {
            Ok(Self::Infinite)
        } else {
            Err(Error::InvalidParameter(format!(
                "dimension must lie in (0, inf], got {n}"
            )))
        }
    }

    /// `1/N`, zero for `N = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Self::Finite(n) => 1.0 / n,
            Self::Infinite => 0.0,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(n) => n,
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinite),
            other => {
                let n: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad dimension {other:?}")))?;
                Self::finite(n)
            }
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(n) => s.serialize_f64(*n),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `Δf(x) = (1/m(x)) Σ_y w(x,y) (f(y) - f(x))`.
pub fn laplacian_at(g: &WeightedGraph, f: &[f64], x: usize) -> Result<f64> {
    g.check_vertex(x)?;
    Ok(laplacian(g, f, x))
}

pub(crate) fn laplacian(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let fx = f[x];
    g.neighbors(x)
        .iter()
        .map(|&(y, w)| w * (f[y] - fx))
        .sum::<f64>()
        / g.measure(x)
}

/// `Γ(f, h)(x) = (1/2m(x)) Σ_y w(x,y) (f(y) - f(x)) (h(y) - h(x))`.
pub fn gamma_at(g: &WeightedGraph, f: &[f64], h: &[f64], x: usize) -> Result<f64> {
    g.check_vertex(x)?;
    Ok(gamma(g, f, h, x))
}

pub fn gamma_sq_at(g: &WeightedGraph, f: &[f64], x: usize) -> Result<f64> {
    gamma_at(g, f, f, x)
}

pub(crate) fn gamma(g: &WeightedGraph, f: &[f64], h: &[f64], x: usize) -> f64 {
    let (fx, hx) = (f[x], h[x]);
    g.neighbors(x)
        .iter()
        .map(|&(y, w)| w * (f[y] - fx) * (h[y] - hx))
        .sum::<f64>()
        / (2.0 * g.measure(x))
}

/// `Γ₂(f)(x) = ½ ΔΓ(f)(x) - Γ(f, Δf)(x)`, evaluated from the definition.
pub fn gamma2_at(g: &WeightedGraph, f: &[f64], x: usize) -> Result<f64> {
    g.check_vertex(x)?;
    Ok(gamma2(g, f, x))
}

pub(crate) fn gamma2(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let mx = g.measure(x);
    let gamma_x = gamma(g, f, f, x);
    let lap_x = laplacian(g, f, x);
    let mut lap_gamma = 0.0;
    let mut mixed = 0.0;
    for &(y, w) in g.neighbors(x) {
        lap_gamma += w * (gamma(g, f, f, y) - gamma_x);
        mixed += w * (f[y] - f[x]) * (laplacian(g, f, y) - lap_x);
    }
    0.5 * lap_gamma / mx - mixed / (2.0 * mx)
}

/// Localised quadratic forms at a vertex in the gauge `f(x) = 0`.
///
/// Coordinates are ordered `s1` then `s2`. `q` is the full symmetric matrix of
/// `f ↦ Γ₂(f)(x) - (1/N)(Δf(x))²`; `b_diag` is the diagonal of the `Γ` form on `s1`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalForms {
    pub center: usize,
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub b_diag: Vec<f64>,
    #[serde(serialize_with = "serialize_matrix")]
    pub q: DMatrix<f64>,
    pub delta_row: Vec<f64>,
    pub dimension: Dimension,
}

fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

impl LocalForms {
    pub fn n1(&self) -> usize {
        self.s1.len()
    }

    pub fn n2(&self) -> usize {
        self.s2.len()
    }

    pub fn q11(&self) -> DMatrix<f64> {
        self.q.view((0, 0), (self.n1(), self.n1())).into_owned()
    }

    pub fn q12(&self) -> DMatrix<f64> {
        self.q
            .view((0, self.n1()), (self.n1(), self.n2()))
            .into_owned()
    }

    pub fn q22(&self) -> DMatrix<f64> {
        self.q
            .view((self.n1(), self.n1()), (self.n2(), self.n2()))
            .into_owned()
    }

    /// Restriction of a global function to the local coordinates, after
    /// shifting so that `f(x) = 0`.
    pub fn local_vector(&self, f: &[f64]) -> DVector<f64> {
        let fx = f[self.center];
        DVector::from_iterator(
            self.n1() + self.n2(),
            self.s1.iter().chain(&self.s2).map(|&v| f[v] - fx),
        )
    }

    /// `fᵀ Q f` for a local coordinate vector.
    pub fn q_form(&self, local: &DVector<f64>) -> f64 {
        local.dot(&(&self.q * local))
    }

    /// `Γ(f)(x)` from the local coordinate vector.
    pub fn b_form(&self, local: &DVector<f64>) -> f64 {
        self.b_diag
            .iter()
            .enumerate()
            .map(|(i, b)| b * local[i] * local[i])
            .sum()
    }
}

// Sparse linear functional on the local coordinates; the centre has no slot.
type Functional = Vec<(usize, f64)>;

fn add_square(q: &mut DMatrix<f64>, coef: f64, a: &Functional) {
    for &(i, ai) in a {
        for &(j, aj) in a {
            q[(i, j)] += coef * ai * aj;
        }
    }
}

// coef · ½(a bᵀ + b aᵀ)
fn add_product(q: &mut DMatrix<f64>, coef: f64, a: &Functional, b: &Functional) {
    for &(i, ai) in a {
        for &(j, bj) in b {
            let v = 0.5 * coef * ai * bj;
            q[(i, j)] += v;
            q[(j, i)] += v;
        }
    }
}

/// Assembles the local forms entering `CD(K, N, x)`.
pub fn local_forms(g: &WeightedGraph, x: usize, dimension: Dimension) -> Result<LocalForms> {
    g.check_vertex(x)?;
    let s1: Vec<usize> = g.neighbors(x).iter().map(|&(y, _)| y).collect();
    let mut slot: HashMap<usize, usize> = s1.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    let mut s2 = Vec::new();
    for &y in &s1 {
        for &(z, _) in g.neighbors(y) {
            if z != x && !slot.contains_key(&z) {
                slot.insert(z, s1.len() + s2.len());
                s2.push(z);
            }
        }
    }
    let n = s1.len() + s2.len();
    let mx = g.measure(x);
    let deg_x = g.weighted_degree(x);

    let unit =
        |v: usize| -> Functional { slot.get(&v).map(|&i| vec![(i, 1.0)]).unwrap_or_default() };
    let difference = |z: usize, y: usize| -> Functional {
        let mut a = unit(z);
        a.extend(unit(y).into_iter().map(|(i, c)| (i, -c)));
        a
    };
    // Δf(v) as a functional for v ∈ {x} ∪ s1
    let laplacian_functional = |v: usize| -> Functional {
        let mv = g.measure(v);
        let mut a = Functional::new();
        for &(z, w) in g.neighbors(v) {
            a.extend(difference(z, v).into_iter().map(|(i, c)| (i, c * w / mv)));
        }
        a
    };

    let mut q = DMatrix::zeros(n, n);
    let lap_x = laplacian_functional(x);
    for &(y, wxy) in g.neighbors(x) {
        let my = g.measure(y);
        // ½ ΔΓf(x), first part: (1/2m(x)) Σ_y w(x,y) Γf(y)
        for &(z, wyz) in g.neighbors(y) {
            add_square(&mut q, 0.5 * wxy / mx * wyz / (2.0 * my), &difference(z, y));
        }
        // ½ ΔΓf(x), second part: -(Deg(x)/2) Γf(x)
        add_square(&mut q, -0.5 * deg_x * wxy / (2.0 * mx), &unit(y));
        // -Γ(f, Δf)(x)
        let mut lap_diff = laplacian_functional(y);
        lap_diff.extend(lap_x.iter().map(|&(i, c)| (i, -c)));
        add_product(&mut q, -wxy / (2.0 * mx), &unit(y), &lap_diff);
    }

    let delta_row: Vec<f64> = g.neighbors(x).iter().map(|&(_, w)| w / mx).collect();
    let inv_n = dimension.reciprocal();
    if inv_n > 0.0 {
        for i in 0..s1.len() {
            for j in 0..s1.len() {
                q[(i, j)] -= inv_n * delta_row[i] * delta_row[j];
            }
        }
    }
    // accumulation order differs between the two triangles
    let q = (&q + q.transpose()) * 0.5;
    let b_diag = g
        .neighbors(x)
        .iter()
        .map(|&(_, w)| w / (2.0 * mx))
        .collect();

    Ok(LocalForms {
        center: x,
        s1,
        s2,
        b_diag,
        q,
        delta_row,
        dimension,
    })
}
