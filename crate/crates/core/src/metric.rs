//! Intrinsic metrics, the resistance metric and metric diagnostics.
//!
//! A metric `ρ` is intrinsic when `Γρ(x, ·) ≤ 1` everywhere for every `x`.
//! The resistance metric `σ(x, y) = sup{f(y) - f(x) : ‖Γf‖∞ ≤ 1}` dominates
//! all of them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::local::gamma;

/// Slack allowed when flagging a table as intrinsic.
pub const INTRINSIC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Huang,
    ScaledCombinatorial,
    Resistance,
    Custom,
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "huang" => Ok(Self::Huang),
            "scaled-combinatorial" => Ok(Self::ScaledCombinatorial),
            "resistance" => Ok(Self::Resistance),
            "custom" => Ok(Self::Custom),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Huang => "huang",
            Self::ScaledCombinatorial => "scaled-combinatorial",
            Self::Resistance => "resistance",
            Self::Custom => "custom",
        })
    }
}

/// Dense symmetric distance table over the vertices of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub kind: MetricKind,
    n: usize,
    dist: Vec<f64>,
    /// Largest distance across an edge.
    pub jump_size: f64,
    /// Filled by [`intrinsic_check`].
    pub intrinsic_margin: Option<f64>,
}

impl MetricTable {
    /// Wraps a full `n × n` row-major table; symmetry and a zero diagonal are enforced.
    pub fn from_dense(g: &WeightedGraph, kind: MetricKind, dist: Vec<f64>) -> Result<Self> {
        let n = g.len();
        if dist.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "table has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for x in 0..n {
            if dist[x * n + x] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "d({0}, {0}) must be 0",
                    g.id(x)
                )));
            }
            for y in 0..n {
                let d = dist[x * n + y];
                if !(d >= 0.0) || d != dist[y * n + x] {
                    return Err(Error::InvalidParameter(format!(
                        "d({}, {}) must be symmetric and nonnegative",
                        g.id(x),
                        g.id(y)
                    )));
                }
            }
        }
        let jump_size = g
            .edges()
            .map(|(u, v, _)| dist[u * n + v])
            .fold(0.0, f64::max);
        Ok(Self {
            kind,
            n,
            dist,
            jump_size,
            intrinsic_margin: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn is_intrinsic(&self) -> bool {
        self.intrinsic_margin
            .is_some_and(|m| m <= 1.0 + INTRINSIC_SLACK)
    }

    /// Largest violation of the triangle inequality (0 when it holds everywhere).
    pub fn triangle_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.n {
            for y in 0..self.n {
                for z in 0..self.n {
                    worst = worst.max(self.dist(x, z) - self.dist(x, y) - self.dist(y, z));
                }
            }
        }
        worst
    }

    pub fn to_json(&self, g: &WeightedGraph) -> serde_json::Value {
        let entries: Vec<TableEntry> = (0..self.n)
            .flat_map(|u| (u + 1..self.n).map(move |v| (u, v)))
            .map(|(u, v)| TableEntry {
                u: g.id(u).to_string(),
                v: g.id(v).to_string(),
                d: self.dist(u, v),
            })
            .collect();
        serde_json::to_value(TableDoc {
            kind: self.kind,
            jump_size: Some(self.jump_size),
            intrinsic_margin: self.intrinsic_margin,
            entries,
        })
        .expect("table serialises")
    }

    /// Reads `{kind?, entries: [{u, v, d}]}`; every unordered pair of distinct vertices must appear.
    pub fn from_json(g: &WeightedGraph, text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let n = g.len();
        let mut dist = vec![f64::NAN; n * n];
        for x in 0..n {
            dist[x * n + x] = 0.0;
        }
        for e in &doc.entries {
            let (u, v) = (g.index_of(&e.u)?, g.index_of(&e.v)?);
            if u == v {
                if e.d != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "d({0}, {0}) must be 0",
                        e.u
                    )));
                }
                continue;
            }
            let prev = dist[u * n + v];
            if !prev.is_nan() && prev != e.d {
                return Err(Error::InvalidParameter(format!(
                    "conflicting entries for ({}, {})",
                    e.u, e.v
                )));
            }
            dist[u * n + v] = e.d;
            dist[v * n + u] = e.d;
        }
        if let Some(i) = dist.iter().position(|d| d.is_nan()) {
            return Err(Error::InvalidParameter(format!(
                "missing distance for ({}, {})",
                g.id(i / n),
                g.id(i % n)
            )));
        }
        MetricTable::from_dense(g, doc.kind, dist)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TableEntry {
    u: String,
    v: String,
    d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableDoc {
    #[serde(default = "custom_kind")]
    kind: MetricKind,
    #[serde(default)]
    jump_size: Option<f64>,
    #[serde(default)]
    intrinsic_margin: Option<f64>,
    entries: Vec<TableEntry>,
}

fn custom_kind() -> MetricKind {
    MetricKind::Custom
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // reversed so the max-heap pops the smallest distance
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn huang_edge_length(g: &WeightedGraph, u: usize, v: usize) -> f64 {
    g.weighted_degree(u).max(g.weighted_degree(v)).powf(-0.5)
}

fn dijkstra(g: &WeightedGraph, source: usize, length: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([HeapItem(0.0, source)]);
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, _) in g.neighbors(u) {
            let nd = d + length(u, v);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// Path metric with edge lengths `(Deg(u) ∨ Deg(v))^{-1/2}`.
pub fn huang_metric(g: &WeightedGraph) -> Result<MetricTable> {
    g.require_connected()?;
    let mut dist = Vec::with_capacity(g.len() * g.len());
    let rows: Vec<Vec<f64>> = (0..g.len())
        .map(|x| dijkstra(g, x, |u, v| huang_edge_length(g, u, v)))
        .collect();
    // symmetrise against last-bit differences between the two Dijkstra runs
    for x in 0..g.len() {
        for y in 0..g.len() {
            dist.push(rows[x][y].min(rows[y][x]));
        }
    }
    MetricTable::from_dense(g, MetricKind::Huang, dist)
}

/// `ρ = d · √(2 / Deg_max)`.
pub fn scaled_combinatorial_metric(g: &WeightedGraph) -> Result<MetricTable> {
    g.require_connected()?;
    let deg_max = g.max_degree()?;
    if deg_max == 0.0 {
        return Err(Error::EdgelessGraph);
    }
    let factor = (2.0 / deg_max).sqrt();
    let mut dist = Vec::with_capacity(g.len() * g.len());
    for x in 0..g.len() {
        for d in g.hop_distances_from(x)? {
            dist.push(d.expect("connected") as f64 * factor);
        }
    }
    MetricTable::from_dense(g, MetricKind::ScaledCombinatorial, dist)
}

/// Computes `max_{x,z} Γ(ρ(x, ·))(z)`, stores it on the table and returns it.
pub fn intrinsic_check(g: &WeightedGraph, table: &mut MetricTable) -> Result<f64> {
    if table.len() != g.len() {
        return Err(Error::InvalidParameter(
            "table and graph sizes differ".into(),
        ));
    }
    let mut margin = 0.0f64;
    for x in 0..g.len() {
        let row = table.row(x);
        for z in 0..g.len() {
            margin = margin.max(gamma(g, row, row, z));
        }
    }
    table.intrinsic_margin = Some(margin);
    Ok(margin)
}

/// `max_{x,y ∈ V} t(x, y)`.
pub fn diameter_under(g: &WeightedGraph, table: &MetricTable) -> Result<f64> {
    g.require_connected()?;
    Ok(table.dist.iter().copied().fold(0.0, f64::max))
}

/// `min_{v ∈ set} t(x, v)`.
pub fn rho_distance_to_set(
    g: &WeightedGraph,
    table: &MetricTable,
    x: usize,
    set: &VertexSet,
) -> Result<f64> {
    g.check_vertex(x)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set
        .iter()
        .map(|&v| table.dist(x, v))
        .fold(f64::INFINITY, f64::min))
}

/// Settings for [`resistance_metric`].
#[derive(Debug, Clone, Copy)]
pub struct ResistanceOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ResistanceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iterations: 100_000,
        }
    }
}

/// Certified bracket on `σ(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct ResistanceEstimate {
    /// Objective of a feasible function; never exceeds the true value.
    pub value: f64,
    /// Dual bound; never below the true value.
    pub upper: f64,
    pub iterations: usize,
    /// Best feasible value after each iteration (non-decreasing).
    #[serde(skip)]
    pub history: Vec<f64>,
}

// Relative floor on the constraint multipliers, keeps every edge conductive.
const MULTIPLIER_FLOOR: f64 = 1e-12;
const STALL_WINDOW: usize = 100;

/// Resistance distance `σ(x, y)` by a primal-dual ascent.
///
/// For multipliers `λ` on the simplex, the network with conductances
/// `w(u,v)(λ_u/2m(u) + λ_v/2m(v))` has effective resistance `R_λ(x, y)` with
/// `σ(x, y) ≤ √R_λ`. Its unit-current potential `u`, scaled so that
/// `max Γu = 1`, is feasible and gives `σ(x, y) ≥ R_λ / √max Γu`. Multipliers
/// are updated by `λ_v ← λ_v √Γu(v)` (normalised), which is monotone for this
/// class of problems. Stops once the bracket is narrower than
/// `tol · (1 + value)`.
pub fn resistance_metric(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    opts: ResistanceOptions,
) -> Result<ResistanceEstimate> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    g.require_connected()?;
    if x == y {
        return Ok(ResistanceEstimate {
            value: 0.0,
            upper: 0.0,
            iterations: 0,
            history: vec![0.0],
        });
    }
    let n = g.len();

    // warm start from the intrinsic tables, both feasible
    let huang = dijkstra(g, x, |u, v| huang_edge_length(g, u, v))[y];
    let hops = g.hop_distances_from(x)?[y].expect("connected") as f64;
    let scaled = hops * (2.0 / g.max_degree()?).sqrt();
    let mut best = huang.max(scaled);
    let mut upper = f64::INFINITY;
    let mut history = Vec::new();
    let mut uppers = Vec::new();

    // coordinates: all vertices except x
    let slot: Vec<Option<usize>> = (0..n)
        .map(|v| match v.cmp(&x) {
            Ordering::Less => Some(v),
            Ordering::Equal => None,
            Ordering::Greater => Some(v - 1),
        })
        .collect();
    let mut lambda = vec![1.0 / n as f64; n];
    let edges: Vec<(usize, usize, f64)> = g.edges().collect();

    for iteration in 1..=opts.max_iterations {
        let mut lap = DMatrix::<f64>::zeros(n - 1, n - 1);
        for &(a, b, w) in &edges {
            let c = w * (lambda[a] / (2.0 * g.measure(a)) + lambda[b] / (2.0 * g.measure(b)));
            if let Some(i) = slot[a] {
                lap[(i, i)] += c;
            }
            if let Some(j) = slot[b] {
                lap[(j, j)] += c;
            }
            if let (Some(i), Some(j)) = (slot[a], slot[b]) {
                lap[(i, j)] -= c;
                lap[(j, i)] -= c;
            }
        }
        let mut rhs = DVector::<f64>::zeros(n - 1);
        rhs[slot[y].unwrap()] = 1.0;
        let chol = lap.cholesky().ok_or_else(|| {
            Error::NotPositiveDefinite("weighted Laplacian in resistance solve".into())
        })?;
        let sol = chol.solve(&rhs);
        let potential: Vec<f64> = (0..n).map(|v| slot[v].map_or(0.0, |i| sol[i])).collect();
        let r = potential[y];
        let grad: Vec<f64> = (0..n)
            .map(|v| gamma(g, &potential, &potential, v))
            .collect();
        let max_grad = grad.iter().copied().fold(0.0, f64::max);

        best = best.max(r / max_grad.sqrt());
        upper = upper.min(r.sqrt());
        history.push(best);

        if upper - best <= opts.tol * (1.0 + best) {
            return Ok(ResistanceEstimate {
                value: best,
                // both sides carry roundoff once the bracket has closed
                upper: upper.max(best),
                iterations: iteration,
                history,
            });
        }
        uppers.push(upper);
        if iteration > STALL_WINDOW {
            let k = iteration - 1 - STALL_WINDOW;
            let still = opts.tol * 1e-3 * (1.0 + best);
            if best - history[k] < still && uppers[k] - upper < still {
                return Err(Error::NonConvergence {
                    iterations: iteration,
                    lower: best,
                    upper,
                });
            }
        }

        let mut total = 0.0;
        for v in 0..n {
            lambda[v] *= grad[v].sqrt();
            total += lambda[v];
        }
        let floor = MULTIPLIER_FLOOR / n as f64;
        for l in &mut lambda {
            *l = (*l / total).max(floor);
        }
        let total: f64 = lambda.iter().sum();
        for l in &mut lambda {
            *l /= total;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        lower: best,
        upper,
    })
}

/// Full resistance table (one solve per unordered pair).
pub fn resistance_table(g: &WeightedGraph, opts: ResistanceOptions) -> Result<MetricTable> {
    g.require_connected()?;
    let n = g.len();
    let mut dist = vec![0.0; n * n];
    for x in 0..n {
        for y in x + 1..n {
            let s = resistance_metric(g, x, y, opts)?.value;
            dist[x * n + y] = s;
            dist[y * n + x] = s;
        }
    }
    MetricTable::from_dense(g, MetricKind::Resistance, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, parse_edge_list, Family, MeasureMode};

    fn gen(f: Family, m: MeasureMode) -> WeightedGraph {
        generate(f, m).unwrap()
    }

    #[test]
    fn huang_examples() {
        let e2 = gen(Family::Path(2), MeasureMode::Normalized);
        assert_eq!(huang_metric(&e2).unwrap().dist(0, 1), 1.0);
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let t = huang_metric(&p3).unwrap();
        assert!((t.dist(0, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((t.dist(0, 2) - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((diameter_under(&p3, &t).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scaled_examples() {
        let e2 = gen(Family::Path(2), MeasureMode::Counting);
        let mut t = scaled_combinatorial_metric(&e2).unwrap();
        assert!((t.dist(0, 1) - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.dist(1, 1), 0.0);
        let margin = intrinsic_check(&e2, &mut t).unwrap();
        assert!((margin - 1.0).abs() < 1e-15);
        assert!(t.is_intrinsic());

        let q2 = gen(Family::Hypercube(2), MeasureMode::Normalized);
        let t = scaled_combinatorial_metric(&q2).unwrap();
        assert!((diameter_under(&q2, &t).unwrap() - 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
        assert!((t.jump_size - 2.0f64.sqrt()).abs() < 1e-15);

        let single = gen(Family::Path(1), MeasureMode::Counting);
        assert_eq!(
            scaled_combinatorial_metric(&single),
            Err(Error::EdgelessGraph)
        );
    }

    #[test]
    fn zero_table_margin() {
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let mut t = MetricTable::from_dense(&p3, MetricKind::Custom, vec![0.0; 9]).unwrap();
        assert_eq!(intrinsic_check(&p3, &mut t).unwrap(), 0.0);
    }

    #[test]
    fn huang_is_intrinsic_on_path() {
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let mut t = huang_metric(&p3).unwrap();
        assert!(intrinsic_check(&p3, &mut t).unwrap() <= 1.0);
    }

    #[test]
    fn resistance_examples() {
        let e2 = gen(Family::Path(2), MeasureMode::Counting);
        let s = resistance_metric(&e2, 0, 1, ResistanceOptions::default()).unwrap();
        assert!((s.value - 2.0f64.sqrt()).abs() < 1e-6);
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let s = resistance_metric(&p3, 0, 2, ResistanceOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-6, "{s:?}");
        assert!(s.upper >= 2.0 - 1e-12);
        assert_eq!(
            resistance_metric(&p3, 1, 1, ResistanceOptions::default())
                .unwrap()
                .value,
            0.0
        );
        let two = parse_edge_list("a b\nc d\n", MeasureMode::Counting).unwrap();
        assert_eq!(
            resistance_metric(&two, 0, 2, ResistanceOptions::default()).unwrap_err(),
            Error::Disconnected
        );
    }

    #[test]
    fn resistance_history_is_monotone() {
        let g = gen(Family::Cycle(7), MeasureMode::Normalized);
        let s = resistance_metric(&g, 0, 3, ResistanceOptions::default()).unwrap();
        for w in s.history.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(s.upper - s.value <= 1e-6 * (1.0 + s.value));
    }

    #[test]
    fn set_distance() {
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let t = huang_metric(&p3).unwrap();
        assert_eq!(
            rho_distance_to_set(&p3, &t, 1, &VertexSet::from_indices([1])).unwrap(),
            0.0
        );
        assert_eq!(
            rho_distance_to_set(&p3, &t, 1, &VertexSet::default()),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn json_table_roundtrip_and_validation() {
        let p3 = gen(Family::Path(3), MeasureMode::Counting);
        let t = huang_metric(&p3).unwrap();
        let text = t.to_json(&p3).to_string();
        let back = MetricTable::from_json(&p3, &text).unwrap();
        assert_eq!(back.kind, MetricKind::Huang);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(back.dist(x, y), t.dist(x, y));
            }
        }
        let missing = r#"{"entries":[{"u":"a","v":"b","d":1}]}"#;
        assert!(MetricTable::from_json(&p3, missing).is_err());
        let negative = r#"{"entries":[{"u":"a","v":"b","d":-1},{"u":"a","v":"c","d":1},{"u":"b","v":"c","d":1}]}"#;
        assert!(MetricTable::from_json(&p3, negative).is_err());
    }

    #[test]
    fn kinds_parse() {
        for k in ["huang", "scaled-combinatorial", "resistance", "custom"] {
            assert_eq!(k.parse::<MetricKind>().unwrap().to_string(), k);
        }
        assert!("euclid".parse::<MetricKind>().is_err());
    }
}
