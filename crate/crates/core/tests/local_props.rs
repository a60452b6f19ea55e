mod common;

use becurv::{gamma2_at, gamma_sq_at, laplacian_at, local_forms, Dimension};
use common::arb_graph;
use proptest::prelude::*;

fn graph_and_function() -> impl Strategy<Value = (becurv::WeightedGraph, Vec<f64>, Vec<f64>, usize)>
{
    arb_graph(8).prop_flat_map(|g| {
        let n = g.len();
        (
            Just(g),
            common::arb_function(n),
            common::arb_function(n),
            0..n,
        )
    })
}

proptest! {
    #[test]
    fn operators_only_see_the_two_ball((g, f, noise, x) in graph_and_function()) {
        let hops = g.hop_distances_from(x).unwrap();
        let far2: Vec<f64> = (0..g.len())
            .map(|v| if matches!(hops[v], Some(0..=2)) { f[v] } else { f[v] + noise[v] })
            .collect();
        let far1: Vec<f64> = (0..g.len())
            .map(|v| if matches!(hops[v], Some(0..=1)) { f[v] } else { f[v] + noise[v] })
            .collect();
        prop_assert_eq!(gamma2_at(&g, &f, x).unwrap(), gamma2_at(&g, &far2, x).unwrap());
        prop_assert_eq!(gamma_sq_at(&g, &f, x).unwrap(), gamma_sq_at(&g, &far1, x).unwrap());
        prop_assert_eq!(laplacian_at(&g, &f, x).unwrap(), laplacian_at(&g, &far1, x).unwrap());
    }

    #[test]
    fn local_matrices_match_pointwise((g, f, _noise, x) in graph_and_function(), n in prop_oneof![Just(f64::INFINITY), 0.5f64..10.0]) {
        let dim = Dimension::finite(n).unwrap();
        let forms = local_forms(&g, x, dim).unwrap();
        let v = forms.local_vector(&f);
        let lap = laplacian_at(&g, &f, x).unwrap();
        let direct = gamma2_at(&g, &f, x).unwrap() - dim.reciprocal() * lap * lap;
        let scale = 1.0 + direct.abs();
        prop_assert!((forms.q_form(&v) - direct).abs() <= 1e-10 * scale);
        let gamma = gamma_sq_at(&g, &f, x).unwrap();
        prop_assert!((forms.b_form(&v) - gamma).abs() <= 1e-12 * (1.0 + gamma));
        prop_assert_eq!(forms.q.clone(), forms.q.transpose());
    }

    #[test]
    fn carre_du_champ_is_nonnegative((g, f, _noise, x) in graph_and_function()) {
        prop_assert!(gamma_sq_at(&g, &f, x).unwrap() >= 0.0);
    }

    #[test]
    fn constants_are_invisible((g, f, _noise, x) in graph_and_function(), c in -5.0f64..5.0) {
        let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
        let a = gamma2_at(&g, &f, x).unwrap();
        let b = gamma2_at(&g, &shifted, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
