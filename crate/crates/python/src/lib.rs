//! Python bindings. Structured results come back as plain dicts.

use becurv::{
    Dimension, Error, Family, GraphFormat, MeasureMode, MetricKind, ResistanceOptions,
    WeightedGraph, DEFAULT_TAU_CD,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError};
use pyo3::prelude::*;

create_exception!(becurv, CurvatureError, PyException);

fn to_py(e: Error) -> PyErr {
    CurvatureError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).expect("json serialises");
    py.import("json")?.call_method1("loads", (text,))
}

#[derive(FromPyObject)]
enum DimensionArg {
    Number(f64),
    Text(String),
}

impl DimensionArg {
    fn resolve(self) -> PyResult<Dimension> {
        match self {
            Self::Number(n) => Dimension::finite(n),
            Self::Text(s) => s.parse(),
        }
        .map_err(to_py)
    }
}

fn measure(mode: &str) -> PyResult<MeasureMode> {
    mode.parse().map_err(to_py)
}

/// Finite weighted graph with a vertex measure.
#[pyclass(frozen, name = "Graph")]
struct PyGraph {
    inner: WeightedGraph,
}

impl PyGraph {
    fn vertex(&self, id: &str) -> PyResult<usize> {
        self.inner.index_of(id).map_err(to_py)
    }
}

#[pymethods]
impl PyGraph {
    /// Parses `u v [w]` lines; a `# measures` section may follow.
    #[staticmethod]
    #[pyo3(signature = (text, measure="explicit"))]
    fn from_edge_list(text: &str, measure: &str) -> PyResult<Self> {
        let inner = becurv::load_graph(
            text.as_bytes(),
            GraphFormat::EdgeList,
            self::measure(measure)?,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, measure="explicit"))]
    fn from_json(text: &str, measure: &str) -> PyResult<Self> {
        let inner = becurv::load_graph(text.as_bytes(), GraphFormat::Json, self::measure(measure)?)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Built-in family such as `"path:3"` or `"bridge:2,3"`.
    #[staticmethod]
    #[pyo3(signature = (spec, measure="counting"))]
    fn generate(spec: &str, measure: &str) -> PyResult<Self> {
        let family: Family = spec.parse().map_err(to_py)?;
        let inner = becurv::generate(family, self::measure(measure)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.ids().to_vec()
    }

    #[getter]
    fn measures(&self) -> Vec<f64> {
        self.inner.measures().to_vec()
    }

    fn edges(&self) -> Vec<(String, String, f64)> {
        self.inner
            .edges()
            .map(|(u, v, w)| {
                (
                    self.inner.id(u).to_string(),
                    self.inner.id(v).to_string(),
                    w,
                )
            })
            .collect()
    }

    fn max_degree(&self) -> PyResult<f64> {
        self.inner.max_degree().map_err(to_py)
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={})",
            self.inner.len(),
            self.inner.edge_count()
        )
    }

    /// `K_{G,x}(N)`; `inf` for an isolated vertex.
    #[pyo3(signature = (vertex, n=DimensionArg::Text("inf".into())))]
    fn curvature(&self, vertex: &str, n: DimensionArg) -> PyResult<f64> {
        let x = self.vertex(vertex)?;
        Ok(becurv::curvature_at(&self.inner, x, n.resolve()?)
            .map_err(to_py)?
            .as_f64())
    }

    /// Curvature at every vertex with `V₀`, `K_pos` and `K_neg`.
    #[pyo3(signature = (n=DimensionArg::Text("inf".into()), tau_cd=DEFAULT_TAU_CD))]
    fn curvature_profile<'py>(
        &self,
        py: Python<'py>,
        n: DimensionArg,
        tau_cd: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let profile =
            becurv::curvature_profile(&self.inner, n.resolve()?, tau_cd).map_err(to_py)?;
        json_to_py(py, &profile.to_json(&self.inner))
    }

    /// Distance table of kind `huang`, `scaled-combinatorial` or `resistance`.
    #[pyo3(signature = (kind="huang", tol=1e-6))]
    fn metric<'py>(&self, py: Python<'py>, kind: &str, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let g = &self.inner;
        let mut table = match kind.parse::<MetricKind>().map_err(to_py)? {
            MetricKind::Huang => becurv::huang_metric(g),
            MetricKind::ScaledCombinatorial => becurv::scaled_combinatorial_metric(g),
            MetricKind::Resistance => becurv::resistance_table(
                g,
                ResistanceOptions {
                    tol,
                    ..Default::default()
                },
            ),
            MetricKind::Custom => {
                return Err(CurvatureError::new_err(
                    "custom tables are loaded from JSON",
                ))
            }
        }
        .map_err(to_py)?;
        becurv::intrinsic_check(g, &mut table).map_err(to_py)?;
        json_to_py(py, &table.to_json(g))
    }

    /// Certified bracket `(lower, upper)` on the resistance distance `σ(u, v)`.
    #[pyo3(signature = (u, v, tol=1e-6))]
    fn resistance(&self, u: &str, v: &str, tol: f64) -> PyResult<(f64, f64)> {
        let opts = ResistanceOptions {
            tol,
            ..Default::default()
        };
        let est = becurv::resistance_metric(&self.inner, self.vertex(u)?, self.vertex(v)?, opts)
            .map_err(to_py)?;
        Ok((est.value, est.upper))
    }

    /// `P_t f` with `f` listed in vertex order.
    fn heat(&self, t: f64, f: Vec<f64>) -> PyResult<Vec<f64>> {
        if f.len() != self.inner.len() {
            return Err(PyIndexError::new_err(format!(
                "expected {} values, got {}",
                self.inner.len(),
                f.len()
            )));
        }
        let sd = becurv::spectral_decompose(&self.inner).map_err(to_py)?;
        becurv::semigroup_apply(&self.inner, &sd, t, &f).map_err(to_py)
    }

    /// Heat kernel `p(t, x, y)` with respect to the measure.
    fn heat_kernel(&self, t: f64, x: &str, y: &str) -> PyResult<f64> {
        let sd = becurv::spectral_decompose(&self.inner).map_err(to_py)?;
        becurv::heat_kernel(&self.inner, &sd, t, self.vertex(x)?, self.vertex(y)?).map_err(to_py)
    }

    /// Certificate for the diameter or tube-radius bound.
    #[pyo3(signature = (n=DimensionArg::Text("inf".into()), metric="scaled-combinatorial", corollary=false, sweep=false, name="graph"))]
    fn check_bounds<'py>(
        &self,
        py: Python<'py>,
        n: DimensionArg,
        metric: &str,
        corollary: bool,
        sweep: bool,
        name: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = becurv::CheckOptions {
            corollary,
            sweep,
            ..Default::default()
        };
        let kind: MetricKind = metric.parse().map_err(to_py)?;
        let cert = becurv::check_main_theorem(&self.inner, name, n.resolve()?, kind, &opts)
            .map_err(to_py)?;
        json_to_py(
            py,
            &serde_json::to_value(&cert).expect("certificate serialises"),
        )
    }
}

/// `H(K, K₀, T)`.
#[pyfunction]
fn h_function(k: f64, k0: f64, horizon: f64) -> PyResult<f64> {
    becurv::h_function(k, k0, horizon).map_err(to_py)
}

#[pyfunction]
fn bound_case_i(deg_max: f64, k0: f64) -> PyResult<f64> {
    becurv::bound_case_i(deg_max, k0).map_err(to_py)
}

#[pyfunction]
fn bound_case_ii(n: f64, k0: f64) -> PyResult<f64> {
    becurv::bound_case_ii(n, k0).map_err(to_py)
}

#[pyfunction]
fn bound_case_iii(deg_max: f64, k: f64, k0: f64) -> PyResult<f64> {
    becurv::bound_case_iii(deg_max, k, k0).map_err(to_py)
}

#[pyfunction]
fn bound_case_iv(r_rho: f64, n: f64, k: f64, k0: f64) -> PyResult<f64> {
    becurv::bound_case_iv(r_rho, n, k, k0).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "becurv")]
fn becurv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CurvatureError", m.py().get_type::<CurvatureError>())?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(h_function, m)?)?;
    m.add_function(wrap_pyfunction!(bound_case_i, m)?)?;
    m.add_function(wrap_pyfunction!(bound_case_ii, m)?)?;
    m.add_function(wrap_pyfunction!(bound_case_iii, m)?)?;
    m.add_function(wrap_pyfunction!(bound_case_iv, m)?)?;
    Ok(())
}
