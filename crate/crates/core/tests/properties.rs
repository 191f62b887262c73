mod common;

use graphkms::graph::Condensation;
use graphkms::oracle::{dense_spectral_radius, enumerate_paths, subinvariance_check};
use graphkms::spectral::{
    perron_vector, resolvent_series, resolvent_solve, spectral_data, spectral_radius, y_vector,
};
use graphkms::{BetaSpec, DirectedGraph, KmsSystem, SimplexCase, StateLabel, VertexSet};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn graphs(max_vertices: usize) -> impl Strategy<Value = DirectedGraph> {
    (1..=max_vertices).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![3 => Just(0u64), 1 => 1u64..=3], n * n).prop_map(move |entries| {
            let matrix = DMatrix::from_row_slice(n, n, &entries);
            let names = (0..n).map(|i| format!("v{i}")).collect();
            DirectedGraph::from_matrix(names, &matrix).unwrap()
        })
    })
}

fn vertex_subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), n)
        .prop_map(|flags| flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect())
}

fn graph_and_subset() -> impl Strategy<Value = (DirectedGraph, Vec<usize>)> {
    graphs(6).prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), vertex_subset(n))
    })
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_partition_and_order_is_a_preorder(g in graphs(6)) {
        let s = Condensation::new(&g);
        let mut seen = vec![0; g.vertex_count()];
        for c in s.components() {
            for &v in &c.members {
                seen[v] += 1;
                prop_assert_eq!(s.component_of(v), c.id);
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        let k = s.components().len();
        for a in 0..k {
            prop_assert!(s.talks_to(a, a));
            for b in 0..k {
                for c in 0..k {
                    if s.talks_to(a, b) && s.talks_to(b, c) {
                        prop_assert!(s.talks_to(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn seneta_order_is_block_upper_triangular(g in graphs(6)) {
        let s = Condensation::new(&g);
        let order = s.seneta_order();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..s.components().len()).collect::<Vec<_>>());
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                for &r in &s.component(order[j]).members {
                    for &c in &s.component(order[i]).members {
                        prop_assert_eq!(g.entry(r, c), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn closures_and_quotients((g, seeds) in graph_and_subset()) {
        let h = g.hereditary_closure(seeds.iter().copied());
        prop_assert!(h.is_hereditary());
        prop_assert!(seeds.iter().all(|&v| h.contains(v)));
        // Minimality: dropping any non-seed member breaks heredity or loses the seeds.
        for v in h.iter().filter(|v| !seeds.contains(v)) {
            let smaller: std::collections::BTreeSet<usize> = h.iter().filter(|&u| u != v).collect();
            prop_assert!(!g.is_hereditary(&smaller));
        }
        let sat = g.saturation(&h).unwrap();
        prop_assert!(sat.is_hereditary() && sat.is_saturated() && h.is_subset(&sat));

        let empty = g.quotient(&VertexSet::empty(&g)).unwrap();
        prop_assert_eq!(&empty.graph, &g);
        if h.len() < g.vertex_count() {
            let q = g.quotient(&h).unwrap();
            for (i, &a) in q.original.iter().enumerate() {
                for (j, &b) in q.original.iter().enumerate() {
                    prop_assert_eq!(q.graph.entry(i, j), g.entry(a, b));
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_path_counts(g in graphs(4), n in 0usize..4) {
        for v in 0..g.vertex_count() {
            for w in 0..g.vertex_count() {
                let listed = enumerate_paths(&g, v, w, n).unwrap().paths;
                prop_assert_eq!(listed.len() as u128, g.path_count(v, w, n));
                for p in &listed {
                    prop_assert!(p.range() == v && p.source() == w && p.len() == n);
                }
            }
        }
    }

    #[test]
    fn radius_matches_dense_eigenvalues(g in graphs(6)) {
        let a = g.real_matrix();
        let dense = dense_spectral_radius(&g).unwrap();
        prop_assert!((spectral_radius(&a) - dense).abs() <= 1e-8, "{} vs {}", spectral_radius(&a), dense);
    }

    #[test]
    fn perron_data_of_components(g in graphs(6)) {
        let a = g.real_matrix();
        for c in Condensation::new(&g).components().iter().filter(|c| !c.trivial) {
            let block = a.select_rows(&c.members).select_columns(&c.members);
            let data = spectral_data(&block).unwrap();
            prop_assert!(data.residual <= 1e-9);
            prop_assert!(data.perron_vector.iter().all(|&x| x > 0.0));
            prop_assert!((data.perron_vector.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(perron_vector(&block).unwrap(), data.perron_vector);
        }
    }

    #[test]
    fn resolvent_solve_matches_series(g in graphs(6), gap in 0.05f64..3.0) {
        let a = g.real_matrix();
        let beta = spectral_radius(&a).max(1e-300).ln().max(-5.0) + gap;
        let b = vec![1.0; g.vertex_count()];
        let exact = resolvent_solve(&a, beta, &b).unwrap();
        let scale = exact.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let series = resolvent_series(&a, beta, &b, 1e-13 * scale).unwrap();
        for (x, y) in exact.iter().zip(&series) {
            prop_assert!(agree(*x, *y), "{} vs {}", x, y);
        }
    }

    #[test]
    fn y_vector_bounds_and_restriction((g, seeds) in graph_and_subset(), gap in 0.05f64..2.0) {
        let beta = spectral_radius(&g.real_matrix()).max(1e-300).ln().max(-5.0) + gap;
        let y = y_vector(&g, beta).unwrap();
        prop_assert!(y.iter().all(|&v| v >= 1.0 - 1e-12));
        let h = g.hereditary_closure(seeds);
        if h.len() < g.vertex_count() {
            let q = g.quotient(&h).unwrap();
            let yq = y_vector(&q.graph, beta).unwrap();
            for (i, &v) in q.original.iter().enumerate() {
                prop_assert!(agree(yq[i], y[v]), "{} vs {}", yq[i], y[v]);
            }
        }
    }

    #[test]
    fn states_are_normalized_subinvariant_and_vanish_on_h(g in graphs(6), offset in -1.5f64..1.5) {
        let s = KmsSystem::new(g);
        let mut betas: Vec<BetaSpec> = s.critical_temperatures();
        betas.push(BetaSpec::Numeric(s.spectral_radius().max(1.0).ln() + offset));
        for beta in betas {
            let simplex = s.simplex(&beta).unwrap();
            for e in &simplex.extremes {
                prop_assert!((e.m.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert!(e.m.iter().all(|&x| x >= -1e-12));
                prop_assert!(subinvariance_check(s.graph(), e.beta_value, &e.m));
                prop_assert!(simplex.h_beta.iter().all(|v| e.m[v].abs() <= 1e-9));
                if let Some(k) = &simplex.k_beta {
                    if matches!(e.label, StateLabel::PhiBetaV { .. }) {
                        prop_assert!(k.iter().all(|v| e.m[v].abs() <= 1e-9));
                    }
                }
            }
        }
    }

    #[test]
    fn removing_the_critical_closure_lowers_the_radius(g in graphs(6)) {
        let s = KmsSystem::new(g);
        if let Ok(mc) = s.minimal_critical_components() {
            let seeds: Vec<usize> = mc.iter().flat_map(|&c| s.structure().component(c).members.clone()).collect();
            let h = s.graph().hereditary_closure(seeds);
            let rest: Vec<usize> = (0..s.graph().vertex_count()).filter(|&v| !h.contains(v)).collect();
            let a = s.graph().real_matrix();
            let inner = spectral_radius(&a.select_rows(&rest).select_columns(&rest));
            prop_assert!(inner < s.spectral_radius() - 1e-9);
        }
    }

    #[test]
    fn mixture_parameters_are_identifiable(g in graphs(5), r in 0.0f64..1.0, r2 in 0.0f64..1.0) {
        let s = KmsSystem::new(g);
        for beta in s.critical_temperatures() {
            let simplex = s.simplex(&beta).unwrap();
            let mc = s.minimal_critical_at(&beta).unwrap();
            let k = simplex.k_beta.clone().unwrap();
            let n = s.graph().vertex_count();
            let Some(v) = (0..n).find(|&v| !k.contains(v)) else { continue };
            let phi = s.phi_measure(&beta, v).unwrap();
            // ε^v = δ_v / y_v with y taken in the quotient by K_β.
            let q = s.graph().quotient(&k).unwrap();
            let y = y_vector(&q.graph, simplex.beta_value).unwrap();
            let mut eps = vec![0.0; n];
            eps[v] = 1.0 / y[q.original.iter().position(|&u| u == v).unwrap()];
            let t = vec![(mc[0], 1.0)];
            let finite = s.general_state_measure(&beta, 1.0, &eps, &t).unwrap();
            prop_assert!(finite.m.iter().zip(&phi.m).all(|(x, y)| (x - y).abs() <= 1e-9));
            let a = s.general_state_measure(&beta, r, &eps, &t).unwrap();
            let b = s.general_state_measure(&beta, r2, &eps, &t).unwrap();
            let same = a.m.iter().zip(&b.m).all(|(x, y)| (x - y).abs() <= 1e-9);
            prop_assert_eq!(same, (r - r2).abs() <= 1e-9);
            let expected_type = if r == 0.0 { graphkms::StateType::Infinite } else { graphkms::StateType::Mixed };
            prop_assert_eq!(a.state_type, expected_type);
            prop_assert_eq!(s.factors_through_graph_algebra(&a).unwrap(), a.factors_through_graph_algebra);
        }
    }

    #[test]
    fn phi_agrees_through_any_valid_quotient((g, seeds) in graph_and_subset(), gap in 0.1f64..2.0) {
        let s = KmsSystem::new(g);
        let beta = BetaSpec::Numeric(s.spectral_radius().max(1.0).ln() + gap);
        let h = s.graph().hereditary_closure(seeds);
        for v in (0..s.graph().vertex_count()).filter(|&v| !h.contains(v)) {
            let direct = s.phi_measure(&beta, v).unwrap();
            let through = s.phi_measure_through(&beta, v, &h).unwrap();
            for (x, y) in direct.m.iter().zip(&through) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn counts_follow_the_case_formulas(g in graphs(6), offset in -1.5f64..1.5) {
        let s = KmsSystem::new(g);
        let beta = BetaSpec::Numeric(s.spectral_radius().max(1.0).ln() + offset);
        let simplex = s.simplex(&beta).unwrap();
        let n = s.graph().vertex_count();
        match simplex.case {
            SimplexCase::Empty => prop_assert!(simplex.extremes.is_empty()),
            SimplexCase::Subcritical => prop_assert_eq!(simplex.extremes.len(), n - simplex.h_beta.len()),
            SimplexCase::Critical => {
                let k = simplex.k_beta.as_ref().unwrap();
                let mc = s.minimal_critical_at(&beta).unwrap();
                prop_assert_eq!(simplex.extremes.len(), mc.len() + n - k.len());
            }
        }
    }
}
