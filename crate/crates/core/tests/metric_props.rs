mod common;

use becurv::{
    huang_metric, intrinsic_check, resistance_metric, scaled_combinatorial_metric,
    ResistanceOptions,
};
use common::arb_graph;
use proptest::prelude::*;

proptest! {
    #[test]
    fn huang_and_scaled_are_intrinsic(g in arb_graph(9)) {
        for mut table in [huang_metric(&g).unwrap(), scaled_combinatorial_metric(&g).unwrap()] {
            let margin = intrinsic_check(&g, &mut table).unwrap();
            prop_assert!(margin <= 1.0 + 1e-12, "{:?} margin {}", table.kind, margin);
        }
    }

    #[test]
    fn scaled_jump_size(g in arb_graph(9)) {
        let table = scaled_combinatorial_metric(&g).unwrap();
        prop_assert_eq!(table.jump_size, (2.0 / g.max_degree().unwrap()).sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn resistance_dominates_intrinsic_metrics(g in arb_graph(6), pick in 0usize..36) {
        let n = g.len();
        let (x, y) = (pick % n, (pick / n) % n);
        prop_assume!(x != y);
        let opts = ResistanceOptions::default();
        let est = resistance_metric(&g, x, y, opts).unwrap();
        prop_assert!(est.value <= est.upper);
        prop_assert!(est.upper - est.value <= opts.tol * (1.0 + est.value));
        for table in [huang_metric(&g).unwrap(), scaled_combinatorial_metric(&g).unwrap()] {
            let rho = table.dist(x, y);
            // the dual value is a certified upper bound on σ
            prop_assert!(est.upper >= rho * (1.0 - 1e-12));
            prop_assert!(est.value >= rho - opts.tol * (1.0 + rho));
        }
    }
}
