mod common;

use becurv::{
    curvature_at, curvature_profile, generate, Curvature, Dimension, Family, MeasureMode,
    DEFAULT_TAU_CD,
};
use common::{dimensions, oracle_curvature, small_graphs};

fn finite(k: Curvature) -> f64 {
    k.finite().expect("finite curvature")
}

#[test]
fn oracle_agrees_on_small_family() {
    for (name, g) in small_graphs() {
        for dim in dimensions() {
            for x in 0..g.len() {
                let fast = finite(curvature_at(&g, x, dim).unwrap());
                let slow = oracle_curvature(&g, x, dim, 50, x as u64);
                assert!(
                    (fast - slow).abs() < 1e-7,
                    "{name} N={dim} x={x}: {fast} vs {slow}"
                );
            }
        }
    }
}

// K(N) = 2(1 - 1/N) on a single unit edge with counting measure
const E2_FIXTURE: [(Dimension, f64); 4] = [
    (Dimension::Finite(1.0), 0.0),
    (Dimension::Finite(2.0), 1.0),
    (Dimension::Finite(5.0), 1.6),
    (Dimension::Infinite, 2.0),
];

#[test]
fn edge_fixture() {
    let g = generate(Family::Path(2), MeasureMode::Counting).unwrap();
    for (dim, expected) in E2_FIXTURE {
        let closed = 2.0 * (1.0 - dim.reciprocal());
        assert!((closed - expected).abs() < 1e-15);
        assert!((oracle_curvature(&g, 0, dim, 50, 1) - expected).abs() < 1e-9);
        for x in 0..2 {
            assert!((finite(curvature_at(&g, x, dim).unwrap()) - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn normalized_hypercubes() {
    for d in 2..=5 {
        let g = generate(Family::Hypercube(d), MeasureMode::Normalized).unwrap();
        let expected = 2.0 / d as f64;
        assert!(
            (oracle_curvature(&g, 0, Dimension::Infinite, 50, d as u64) - expected).abs() < 1e-9
        );
        let profile = curvature_profile(&g, Dimension::Infinite, DEFAULT_TAU_CD).unwrap();
        for k in &profile.values {
            assert!((finite(*k) - expected).abs() < 1e-12, "Q{d}: {k}");
        }
    }
}

#[test]
fn counting_hypercubes() {
    for d in 2..=4 {
        let g = generate(Family::Hypercube(d), MeasureMode::Counting).unwrap();
        assert!((oracle_curvature(&g, 0, Dimension::Infinite, 50, 3) - 2.0).abs() < 1e-9);
        assert!((finite(curvature_at(&g, 0, Dimension::Infinite).unwrap()) - 2.0).abs() < 1e-12);
    }
}

#[test]
fn bridge_nonpositive_set() {
    for path_len in 1..=4 {
        let g = generate(
            Family::Bridge {
                cube_dim: 2,
                path_len,
            },
            MeasureMode::Counting,
        )
        .unwrap();
        let mut expected: Vec<String> = vec!["L00".into(), "R00".into()];
        expected.extend((1..path_len).map(|i| format!("p{i}")));
        expected.sort();
        for dim in [Dimension::Infinite, Dimension::Finite(5.0)] {
            let profile = curvature_profile(&g, dim, DEFAULT_TAU_CD).unwrap();
            assert_eq!(
                profile.v0.names(&g),
                expected,
                "bridge:2,{path_len} N={dim}"
            );
            // the classification agrees with the oracle
            for x in 0..g.len() {
                let slow = oracle_curvature(&g, x, dim, 50, 11);
                assert_eq!(
                    slow <= DEFAULT_TAU_CD,
                    profile.v0.contains(x),
                    "x={}",
                    g.id(x)
                );
            }
        }
        // counting-measure cube corners keep K(∞) = 2, their neighbours 3/2
        let corner = g.index_of("L11").unwrap();
        assert!(
            (finite(curvature_at(&g, corner, Dimension::Infinite).unwrap()) - 2.0).abs() < 1e-12
        );
        let side = g.index_of("L01").unwrap();
        assert!((finite(curvature_at(&g, side, Dimension::Infinite).unwrap()) - 1.5).abs() < 1e-12);
    }
}
