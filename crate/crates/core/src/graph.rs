//! Weighted graph model: vertex set with symmetric edge weights `w` and a
//! strictly positive vertex measure `m`.
//!
//! Vertices are identified by strings and densely indexed in load order; every
//! table emitted by the crate follows that order.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricTable;

/// How the vertex measure is chosen when a graph is loaded or generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMode {
    /// Measures given in the input (missing entries default to 1).
    Explicit,
    /// `m(x) = sum_y w(x, y)`, so every weighted degree equals 1.
    Normalized,
    /// `m(x) = 1`.
    Counting,
}

impl FromStr for MeasureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Self::Explicit),
            "normalized" => Ok(Self::Normalized),
            "counting" => Ok(Self::Counting),
            other => Err(Error::InvalidParameter(format!(
                "unknown measure mode {other:?}"
            ))),
        }
    }
}

impl fmt::Display for MeasureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Explicit => "explicit",
            Self::Normalized => "normalized",
            Self::Counting => "counting",
        })
    }
}

/// Input format accepted by [`load_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Json,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" => Ok(Self::EdgeList),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown graph format {other:?}"
            ))),
        }
    }
}

/// A finite weighted graph `(V, w, m)`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    // neighbor lists sorted by vertex index, only entries with w > 0
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{x}")))
        }
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Neighbors `y` of `x` (those with `w(x, y) > 0`) together with `w(x, y)`.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(z, _)| z)
            .map(|i| self.adjacency[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Weighted degree `Deg(x) = (1/m(x)) sum_y w(x, y)`.
    pub fn degree(&self, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        Ok(self.weighted_degree(x))
    }

    pub(crate) fn weighted_degree(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, w)| w).sum::<f64>() / self.measure[x]
    }

    pub fn max_degree(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok((0..self.len())
            .map(|x| self.weighted_degree(x))
            .fold(0.0, f64::max))
    }

    /// Hop counts from `x` on the unweighted adjacency; `None` marks unreachable vertices.
    pub fn hop_distances_from(&self, x: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(x)?;
        let mut dist = vec![None; self.len()];
        dist[x] = Some(0);
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Combinatorial distance, `None` when `x` and `y` lie in different components.
    pub fn graph_distance(&self, x: usize, y: usize) -> Result<Option<usize>> {
        self.check_vertex(y)?;
        Ok(self.hop_distances_from(x)?[y])
    }

    pub fn is_connected(&self) -> bool {
        match self.hop_distances_from(0) {
            Ok(d) => d.iter().all(Option::is_some),
            Err(_) => false,
        }
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    /// Same vertices and measure, every edge weight multiplied by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for nbrs in &mut out.adjacency {
            for (_, w) in nbrs.iter_mut() {
                *w *= factor;
            }
        }
        out
    }

    /// Same vertices and weights, every measure multiplied by `factor`.
    pub fn scale_measure(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.measure {
            *m *= factor;
        }
        out
    }

    /// All vertices within distance `r` of `x`.
    pub fn ball(&self, x: usize, r: f64, distance: Distance<'_>) -> Result<VertexSet> {
        self.tube(&VertexSet::from_indices([x]), r, distance)
    }

    /// Tubular neighborhood: union of the balls of radius `r` around the members of `set`.
    pub fn tube(&self, set: &VertexSet, r: f64, distance: Distance<'_>) -> Result<VertexSet> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        for &x in set.iter() {
            self.check_vertex(x)?;
        }
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        let mut inside = vec![false; self.len()];
        for &x in set.iter() {
            match distance {
                Distance::Combinatorial => {
                    for (y, d) in self.hop_distances_from(x)?.into_iter().enumerate() {
                        if d.is_some_and(|d| d as f64 <= r) {
                            inside[y] = true;
                        }
                    }
                }
                Distance::Metric(table) => {
                    for (y, flag) in inside.iter_mut().enumerate() {
                        if table.dist(x, y) <= r {
                            *flag = true;
                        }
                    }
                }
            }
        }
        Ok(VertexSet::from_indices(
            inside
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i),
        ))
    }

    /// Build from a builder's accumulated data, applying `mode` to fix the measure.
    fn finish(builder: GraphBuilder, mode: MeasureMode) -> Result<Self> {
        let GraphBuilder {
            ids,
            index,
            mut adjacency,
            measure,
        } = builder;
        for nbrs in &mut adjacency {
            nbrs.retain(|&(_, w)| w > 0.0);
            nbrs.sort_by_key(|&(v, _)| v);
        }
        let measure: Vec<f64> = match mode {
            MeasureMode::Counting => vec![1.0; ids.len()],
            MeasureMode::Normalized => adjacency
                .iter()
                .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
                .collect(),
            MeasureMode::Explicit => measure.into_iter().map(|m| m.unwrap_or(1.0)).collect(),
        };
        for (x, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonPositiveMeasure {
                    vertex: ids[x].clone(),
                    measure: m,
                });
            }
        }
        Ok(Self {
            ids,
            index,
            adjacency,
            measure,
        })
    }
}

/// Which distance a ball or tube is measured in.
#[derive(Debug, Clone, Copy)]
pub enum Distance<'a> {
    Combinatorial,
    Metric(&'a MetricTable),
}

/// Sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    /// Indicator vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for &x in &self.0 {
            v[x] = 1.0;
        }
        v
    }

    pub fn names(&self, g: &WeightedGraph) -> Vec<String> {
        self.0.iter().map(|&x| g.id(x).to_string()).collect()
    }
}

/// Incremental construction with the validation shared by all loaders.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<Option<f64>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.adjacency.push(Vec::new());
        self.measure.push(None);
        i
    }

    /// Adds an undirected edge. Repeating an edge with the same weight is a no-op.
    pub fn add_edge(&mut self, u: &str, v: &str, w: f64) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u.to_string()));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidWeight {
                u: u.to_string(),
                v: v.to_string(),
                weight: w,
            });
        }
        let a = self.add_vertex(u);
        let b = self.add_vertex(v);
        if let Some(&(_, prev)) = self.adjacency[a].iter().find(|&&(y, _)| y == b) {
            if prev != w {
                return Err(Error::ConflictingEdge {
                    u: u.to_string(),
                    v: v.to_string(),
                    first: prev,
                    second: w,
                });
            }
            return Ok(());
        }
        self.adjacency[a].push((b, w));
        self.adjacency[b].push((a, w));
        Ok(())
    }

    pub fn set_measure(&mut self, id: &str, m: f64) -> Result<()> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonPositiveMeasure {
                vertex: id.to_string(),
                measure: m,
            });
        }
        let i = self.add_vertex(id);
        self.measure[i] = Some(m);
        Ok(())
    }

    pub fn build(self, mode: MeasureMode) -> Result<WeightedGraph> {
        WeightedGraph::finish(self, mode)
    }
}

/// Reads a graph from `source` in the given format.
pub fn load_graph(
    mut source: impl Read,
    format: GraphFormat,
    mode: MeasureMode,
) -> Result<WeightedGraph> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    match format {
        GraphFormat::EdgeList => parse_edge_list(&text, mode),
        GraphFormat::Json => parse_json(&text, mode),
    }
}

/// Parses `u v [w]` lines, `#` comments, and an optional `# measures` section of `u m` lines.
pub fn parse_edge_list(text: &str, mode: MeasureMode) -> Result<WeightedGraph> {
    let mut builder = GraphBuilder::new();
    let mut in_measures = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim().eq_ignore_ascii_case("measures") {
                in_measures = true;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let number = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("expected a number, found {s:?}"),
            })
        };
        if in_measures {
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `vertex measure`".into(),
                });
            }
            builder.set_measure(tokens[0], number(tokens[1])?)?;
        } else {
            let w = match tokens.len() {
                2 => 1.0,
                3 => number(tokens[2])?,
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "expected `u v [w]`".into(),
                    })
                }
            };
            builder.add_edge(tokens[0], tokens[1], w)?;
        }
    }
    builder.build(mode)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum JsonId {
    Str(String),
    Int(i64),
}

impl JsonId {
    fn into_string(self) -> String {
        match self {
            JsonId::Str(s) => s,
            JsonId::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonVertex {
    id: JsonId,
    m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEdge {
    u: JsonId,
    v: JsonId,
    w: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    #[serde(default)]
    vertices: Vec<JsonVertex>,
    #[serde(default)]
    edges: Vec<JsonEdge>,
}

/// Parses `{"vertices": [{"id", "m"?}], "edges": [{"u", "v", "w"?}]}`.
pub fn parse_json(text: &str, mode: MeasureMode) -> Result<WeightedGraph> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let mut builder = GraphBuilder::new();
    for v in doc.vertices {
        let id = v.id.into_string();
        builder.add_vertex(&id);
        if let Some(m) = v.m {
            builder.set_measure(&id, m)?;
        }
    }
    for e in doc.edges {
        builder.add_edge(&e.u.into_string(), &e.v.into_string(), e.w.unwrap_or(1.0))?;
    }
    builder.build(mode)
}

/// Test families with unit edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Hypercube(usize),
    /// Two `cube_dim`-cubes whose origins are joined by a path of `path_len` edges.
    Bridge {
        cube_dim: usize,
        path_len: usize,
    },
}

impl FromStr for Family {
    type Err = Error;

    /// `path:3`, `cycle:5`, `complete:4`, `hypercube:3`, `bridge:2,3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad generator spec {s:?}"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let args: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name, args.as_slice()) {
            ("path", &[n]) => Ok(Self::Path(n)),
            ("cycle", &[n]) => Ok(Self::Cycle(n)),
            ("complete", &[n]) => Ok(Self::Complete(n)),
            ("hypercube", &[d]) => Ok(Self::Hypercube(d)),
            ("bridge", &[d, l]) => Ok(Self::Bridge {
                cube_dim: d,
                path_len: l,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Path(n) => write!(f, "path:{n}"),
            Self::Cycle(n) => write!(f, "cycle:{n}"),
            Self::Complete(n) => write!(f, "complete:{n}"),
            Self::Hypercube(d) => write!(f, "hypercube:{d}"),
            Self::Bridge { cube_dim, path_len } => write!(f, "bridge:{cube_dim},{path_len}"),
        }
    }
}

/// Spreadsheet-style names: a, b, ..., z, aa, ab, ...
fn letter_name(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

fn bits(v: usize, d: usize) -> String {
    (0..d)
        .rev()
        .map(|k| if v >> k & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Builds a unit-weight member of `family` with the requested measure.
pub fn generate(family: Family, mode: MeasureMode) -> Result<WeightedGraph> {
    if mode == MeasureMode::Explicit {
        return Err(Error::InvalidParameter(
            "generated graphs take a counting or normalized measure".into(),
        ));
    }
    let invalid = || Error::InvalidParameter(format!("invalid parameters for {family}"));
    let mut b = GraphBuilder::new();
    match family {
        Family::Path(n) => {
            if n < 1 {
                return Err(invalid());
            }
            let names: Vec<String> = (0..n).map(letter_name).collect();
            for name in &names {
                b.add_vertex(name);
            }
            for pair in names.windows(2) {
                b.add_edge(&pair[0], &pair[1], 1.0)?;
            }
        }
        Family::Cycle(n) => {
            if n < 3 {
                return Err(invalid());
            }
            let names: Vec<String> = (0..n).map(letter_name).collect();
            for i in 0..n {
                b.add_edge(&names[i], &names[(i + 1) % n], 1.0)?;
            }
        }
        Family::Complete(n) => {
            if n < 1 {
                return Err(invalid());
            }
            let names: Vec<String> = (0..n).map(letter_name).collect();
            for name in &names {
                b.add_vertex(name);
            }
            for i in 0..n {
                for j in i + 1..n {
                    b.add_edge(&names[i], &names[j], 1.0)?;
                }
            }
        }
        Family::Hypercube(d) => {
            if !(1..=20).contains(&d) {
                return Err(invalid());
            }
            add_cube(&mut b, "", d)?;
        }
        Family::Bridge { cube_dim, path_len } => {
            if !(1..=20).contains(&cube_dim) || path_len < 1 {
                return Err(invalid());
            }
            add_cube(&mut b, "L", cube_dim)?;
            add_cube(&mut b, "R", cube_dim)?;
            let mut chain = vec![format!("L{}", bits(0, cube_dim))];
            chain.extend((1..path_len).map(|i| format!("p{i}")));
            chain.push(format!("R{}", bits(0, cube_dim)));
            for pair in chain.windows(2) {
                b.add_edge(&pair[0], &pair[1], 1.0)?;
            }
        }
    }
    b.build(mode)
}

fn add_cube(b: &mut GraphBuilder, prefix: &str, d: usize) -> Result<()> {
    for v in 0..1usize << d {
        b.add_vertex(&format!("{prefix}{}", bits(v, d)));
    }
    for v in 0..1usize << d {
        for k in 0..d {
            let u = v ^ (1 << k);
            if v < u {
                b.add_edge(
                    &format!("{prefix}{}", bits(v, d)),
                    &format!("{prefix}{}", bits(u, d)),
                    1.0,
                )?;
            }
        }
    }
    Ok(())
}
