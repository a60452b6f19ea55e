mod common;

use becurv::{cd_holds, curvature_at, Dimension};
use common::{arb_graph, oracle_curvature};
use proptest::prelude::*;

fn k(g: &becurv::WeightedGraph, x: usize, dim: Dimension) -> f64 {
    curvature_at(g, x, dim).unwrap().as_f64()
}

proptest! {
    #[test]
    fn curvature_increases_with_dimension(g in arb_graph(7), n1 in 0.5f64..20.0, dn in 0.0f64..20.0) {
        for x in 0..g.len() {
            let a = k(&g, x, Dimension::Finite(n1));
            let b = k(&g, x, Dimension::Finite(n1 + dn));
            let c = k(&g, x, Dimension::Infinite);
            prop_assert!(a <= b + 1e-9 * (1.0 + b.abs()));
            prop_assert!(b <= c + 1e-9 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn scaling_covariance(g in arb_graph(7), c in 0.1f64..10.0) {
        let heavier = g.scale_weights(c);
        let bigger = g.scale_measure(c);
        for x in 0..g.len() {
            for dim in [Dimension::Finite(3.0), Dimension::Infinite] {
                let base = k(&g, x, dim);
                let tol = 1e-8 * (1.0 + base.abs()) * c.max(1.0 / c);
                prop_assert!((k(&heavier, x, dim) - c * base).abs() <= tol);
                prop_assert!((k(&bigger, x, dim) - base / c).abs() <= tol);
            }
        }
    }

    #[test]
    fn cd_threshold_is_the_curvature(g in arb_graph(6), x in 0usize..6) {
        let x = x % g.len();
        let kx = k(&g, x, Dimension::Infinite);
        prop_assert!(cd_holds(&g, x, kx, Dimension::Infinite, 1e-8).unwrap());
        prop_assert!(!cd_holds(&g, x, kx + 1e-6, Dimension::Infinite, 1e-8).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn oracle_on_random_weights(g in arb_graph(5), n in prop_oneof![Just(f64::INFINITY), 1.0f64..6.0]) {
        let dim = Dimension::finite(n).unwrap();
        for x in 0..g.len() {
            let fast = k(&g, x, dim);
            let slow = oracle_curvature(&g, x, dim, 50, 5);
            prop_assert!((fast - slow).abs() <= 1e-7 * (1.0 + fast.abs()), "x={} {} vs {}", x, fast, slow);
        }
    }
}
