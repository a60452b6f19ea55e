//! Shared fixtures: graph families, a random connected graph strategy and a
//! brute-force curvature oracle that never touches the library's local matrices.

#![allow(dead_code)]

use becurv::{
    gamma2_at, gamma_sq_at, generate, laplacian_at, Dimension, Family, GraphBuilder, MeasureMode,
    WeightedGraph,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small unit-weight families, each at most 12 vertices.
pub fn small_families() -> Vec<Family> {
    let mut out = Vec::new();
    for n in 2..=5 {
        out.push(Family::Path(n));
    }
    for n in 3..=6 {
        out.push(Family::Cycle(n));
    }
    for n in 2..=5 {
        out.push(Family::Complete(n));
    }
    out.push(Family::Hypercube(2));
    out.push(Family::Hypercube(3));
    for l in 1..=3 {
        out.push(Family::Bridge {
            cube_dim: 2,
            path_len: l,
        });
    }
    out
}

pub fn small_graphs() -> Vec<(String, WeightedGraph)> {
    let mut out = Vec::new();
    for fam in small_families() {
        for mode in [MeasureMode::Counting, MeasureMode::Normalized] {
            out.push((format!("{fam} {mode}"), generate(fam, mode).unwrap()));
        }
    }
    out
}

pub fn dimensions() -> [Dimension; 4] {
    [
        Dimension::Finite(1.0),
        Dimension::Finite(2.0),
        Dimension::Finite(5.0),
        Dimension::Infinite,
    ]
}

/// Connected graph on `n` vertices: a random spanning tree plus extra edges,
/// positive weights and explicit measures.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let tree = proptest::collection::vec((any::<prop::sample::Index>(), 0.2f64..3.0), n - 1);
        let extra = proptest::collection::vec((0..n, 0..n, 0.2f64..3.0), 0..n);
        let measures = proptest::collection::vec(0.3f64..2.0, n);
        (Just(n), tree, extra, measures).prop_map(|(n, tree, extra, measures)| {
            let mut b = GraphBuilder::new();
            let name = |i: usize| format!("v{i}");
            for i in 0..n {
                b.add_vertex(&name(i));
            }
            let mut seen = std::collections::HashSet::new();
            for (i, (parent, w)) in tree.into_iter().enumerate() {
                let child = i + 1;
                let p = parent.index(child);
                seen.insert((p, child));
                b.add_edge(&name(p), &name(child), w).unwrap();
            }
            for (u, v, w) in extra {
                let key = (u.min(v), u.max(v));
                if u != v && seen.insert(key) {
                    b.add_edge(&name(key.0), &name(key.1), w).unwrap();
                }
            }
            for (i, m) in measures.into_iter().enumerate() {
                b.set_measure(&name(i), m).unwrap();
            }
            b.build(MeasureMode::Explicit).unwrap()
        })
    })
}

pub fn arb_function(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Symmetric matrix of a quadratic form `q` over the listed coordinates, by polarization.
fn polarize(n: usize, coords: &[usize], q: impl Fn(&[f64]) -> f64) -> Vec<Vec<f64>> {
    let k = coords.len();
    let unit = |i: usize| {
        let mut f = vec![0.0; n];
        f[coords[i]] = 1.0;
        f
    };
    let diag: Vec<f64> = (0..k).map(|i| q(&unit(i))).collect();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        m[i][i] = diag[i];
        for j in i + 1..k {
            let mut f = unit(i);
            f[coords[j]] = 1.0;
            let v = 0.5 * (q(&f) - diag[i] - diag[j]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Smallest `λ` with `det(A - λB) = 0` for 2×2 symmetric `A` and positive
/// semidefinite `B`, together with a minimising coefficient pair.
fn min_pencil_2x2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> Option<(f64, [f64; 2])> {
    // det = c2 λ² + c1 λ + c0
    let c2 = b[0][0] * b[1][1] - b[0][1] * b[0][1];
    let c1 = -(a[0][0] * b[1][1] + a[1][1] * b[0][0] - 2.0 * a[0][1] * b[0][1]);
    let c0 = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    let scale = b[0][0].abs() + b[1][1].abs();
    let roots: Vec<f64> = if c2.abs() <= 1e-14 * scale * scale {
        if c1 == 0.0 {
            return None;
        }
        vec![-c0 / c1]
    } else {
        let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0).sqrt();
        vec![(-c1 - disc) / (2.0 * c2), (-c1 + disc) / (2.0 * c2)]
    };
    roots
        .into_iter()
        .filter_map(|l| {
            // null vector of A - λB
            let m = [
                [a[0][0] - l * b[0][0], a[0][1] - l * b[0][1]],
                [a[1][0] - l * b[1][0], a[1][1] - l * b[1][1]],
            ];
            let v = if m[0][0].abs() + m[0][1].abs() >= m[1][0].abs() + m[1][1].abs() {
                [-m[0][1], m[0][0]]
            } else {
                [-m[1][1], m[1][0]]
            };
            let bv = b[0][0] * v[0] * v[0] + 2.0 * b[0][1] * v[0] * v[1] + b[1][1] * v[1] * v[1];
            (bv > 1e-14 * scale * (v[0] * v[0] + v[1] * v[1]) && l.is_finite()).then_some((l, v))
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
}

/// Brute-force `K_{G,x}(N)`: the infimum of `(Γ₂f - (Δf)²/N) / Γf` at `x` over
/// functions supported on the 2-ball with `f(x) = 0`, by steepest descent on the
/// Rayleigh quotient with an exact line search, restarted from `starts` random points.
pub fn oracle_curvature(
    g: &WeightedGraph,
    x: usize,
    dimension: Dimension,
    starts: usize,
    seed: u64,
) -> f64 {
    let n = g.len();
    let hops = g.hop_distances_from(x).unwrap();
    let coords: Vec<usize> = (0..n)
        .filter(|&v| v != x && matches!(hops[v], Some(1 | 2)))
        .collect();
    let inv_n = match dimension {
        Dimension::Finite(v) => 1.0 / v,
        Dimension::Infinite => 0.0,
    };
    let q = polarize(n, &coords, |f| {
        let lap = laplacian_at(g, f, x).unwrap();
        gamma2_at(g, f, x).unwrap() - inv_n * lap * lap
    });
    let b = polarize(n, &coords, |f| gamma_sq_at(g, f, x).unwrap());
    let k = coords.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut f: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut bf = mat_vec(&b, &f);
        if dot(&f, &bf) <= 1e-12 {
            continue;
        }
        let mut rho = dot(&f, &mat_vec(&q, &f)) / dot(&f, &bf);
        for _ in 0..20_000 {
            let qf = mat_vec(&q, &f);
            let mut grad: Vec<f64> = qf.iter().zip(&bf).map(|(a, c)| a - rho * c).collect();
            // search in span{f, grad} with grad made orthogonal to f
            let ff = dot(&f, &f);
            let proj = dot(&grad, &f) / ff;
            for (gi, fi) in grad.iter_mut().zip(&f) {
                *gi -= proj * fi;
            }
            let gnorm = dot(&grad, &grad).sqrt();
            if gnorm <= 1e-15 * ff.sqrt() {
                break;
            }
            for gi in grad.iter_mut() {
                *gi *= ff.sqrt() / gnorm;
            }
            let qg = mat_vec(&q, &grad);
            let bg = mat_vec(&b, &grad);
            let pa = [
                [dot(&f, &qf), dot(&f, &qg)],
                [dot(&grad, &qf), dot(&grad, &qg)],
            ];
            let pb = [
                [dot(&f, &bf), dot(&f, &bg)],
                [dot(&grad, &bf), dot(&grad, &bg)],
            ];
            let Some((lambda, c)) = min_pencil_2x2(pa, pb) else {
                break;
            };
            if lambda >= rho - 1e-15 * (1.0 + rho.abs()) {
                break;
            }
            f = f
                .iter()
                .zip(&grad)
                .map(|(a, d)| c[0] * a + c[1] * d)
                .collect();
            let norm = dot(&f, &f).sqrt();
            f.iter_mut().for_each(|v| *v /= norm);
            bf = mat_vec(&b, &f);
            rho = dot(&f, &mat_vec(&q, &f)) / dot(&f, &bf);
        }
        best = best.min(rho);
    }
    best
}
