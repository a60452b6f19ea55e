//! Bakry-Émery curvature on finite weighted graphs.
//!
//! The crate computes pointwise curvatures `K_{G,x}(N)`, intrinsic and
//! resistance metrics, and the heat semigroup. It also checks the diameter
//! and tube-radius bounds that curvature controls, emitting certificates
//! that compare each bound with the distances measured on the graph.
//!
//! ```
//! use becurv::{curvature_at, generate, Curvature, Dimension, Family, MeasureMode};
//!
//! let g = generate(Family::Path(2), MeasureMode::Counting).unwrap();
//! let k = curvature_at(&g, 0, Dimension::Infinite).unwrap();
//! assert!(matches!(k, Curvature::Finite(v) if (v - 2.0).abs() < 1e-12));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod curvature;
pub mod error;
pub mod graph;
pub mod heat;
pub mod linalg;
pub mod local;
pub mod metric;
pub mod quadrature;

pub use bounds::{
    bound_case_i, bound_case_ii, bound_case_iii, bound_case_iv, bound_corollary,
    check_main_theorem, check_with_profile, h_function, h_ratio_check, h_upper_estimate,
    radius_sweep, tube_radius_at, Certificate, CertificateCase, CheckOptions, SweepPoint,
};
pub use curvature::{
    cd_holds, curvature_at, curvature_profile, dimension_shift_check, Curvature, CurvatureProfile,
    DimensionShiftReport, DEFAULT_TAU_CD,
};
pub use error::{Error, Result};
pub use graph::{
    generate, load_graph, parse_edge_list, parse_json, Distance, Family, GraphBuilder, GraphFormat,
    MeasureMode, VertexSet, WeightedGraph,
};
pub use heat::{
    heat_kernel, semigroup_apply, spectral_decompose, transition_probability,
    verify_gradient_bound, verify_pt1, verify_refined_gradient_bound, Residual, SpectralData,
};
pub use local::{
    gamma2_at, gamma_at, gamma_sq_at, laplacian_at, local_forms, Dimension, LocalForms,
};
pub use metric::{
    diameter_under, huang_metric, intrinsic_check, resistance_metric, resistance_table,
    rho_distance_to_set, scaled_combinatorial_metric, MetricKind, MetricTable, ResistanceEstimate,
    ResistanceOptions,
};
