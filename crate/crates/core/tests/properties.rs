//! Property tests for the structural, stationary and bound invariants.

use csma_core::bounds::*;
use csma_core::stationary::*;
use csma_core::topology::*;
use proptest::prelude::*;

fn random_graph() -> impl Strategy<Value = InterferenceGraph> {
    (1usize..=8).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
            InterferenceGraph::from_edges(n, &edges).unwrap()
        })
    })
}

fn graph_with_sigma() -> impl Strategy<Value = (InterferenceGraph, Vec<f64>)> {
    random_graph().prop_flat_map(|g| {
        let n = g.n_nodes();
        (Just(g), proptest::collection::vec(0.1f64..10.0, n))
    })
}

/// Partite families with one activity factor per component.
fn partite_instance() -> impl Strategy<Value = (TopologySpec, Vec<f64>, Vec<f64>)> {
    let specs = prop_oneof![
        proptest::collection::vec(1usize..=3, 2..=3).prop_map(|sizes| TopologySpec::CompletePartite { sizes }),
        Just(TopologySpec::Grid { rows: 2, cols: 2, wrap: false }),
        Just(TopologySpec::Grid { rows: 2, cols: 3, wrap: false }),
        Just(TopologySpec::Ring { n: 6 }),
        Just(TopologySpec::Line { n: 4 }),
    ];
    (specs, proptest::collection::vec(0.2f64..20.0, 3), proptest::collection::vec(0.2f64..0.95, 3))
}

fn brute_force_independent_sets(g: &InterferenceGraph) -> usize {
    (0u64..1 << g.n_nodes()).filter(|&m| g.is_independent(m)).count()
}

#[test]
fn path_state_count_is_fibonacci() {
    let mut fib = vec![1usize, 1];
    for k in 2..16 {
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    for n in 1..=12 {
        let g = build_topology(&TopologySpec::Line { n }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        // F(1) = F(2) = 1, so F(n + 2) is fib[n + 1].
        assert_eq!(ss.len(), fib[n + 1], "n = {n}");
        assert_eq!(ss.len(), brute_force_independent_sets(&g));
    }
}

#[test]
fn grid_zeta_matches_brute_force() {
    for (b, wrap) in [(1, false), (2, false), (1, true), (2, true)] {
        let g = build_topology(&TopologySpec::Grid { rows: 2 * b, cols: 2 * b, wrap }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let d = partite_decomposition(&g, None).unwrap();
        let s = compute_zeta(&ss, &d).unwrap();
        let brute = ss
            .states()
            .iter()
            .map(|&u| d.h_value(u))
            .filter(|&h| h < 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.zeta, 1.0 - brute);
        assert_eq!(s.zeta, 1.0 / (2.0 * (b * b) as f64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_space_is_downward_closed(g in random_graph()) {
        let ss = enumerate_state_space(&g).unwrap();
        prop_assert_eq!(ss.len(), brute_force_independent_sets(&g));
        for &u in ss.states() {
            for i in u.active_nodes() {
                prop_assert!(ss.contains(u.without(i)));
            }
        }
        prop_assert!(ss.states().windows(2).all(|w| w[0].to_bits(g.n_nodes()) < w[1].to_bits(g.n_nodes())));
    }

    #[test]
    fn complete_partite_states_stay_in_one_component(sizes in proptest::collection::vec(1usize..=4, 1..=3)) {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: sizes.clone() }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let d = partite_decomposition(&g, None).unwrap();
        let expected = 1 + sizes.iter().map(|&m| (1usize << m) - 1).sum::<usize>();
        prop_assert_eq!(ss.len(), expected);
        for &u in ss.states() {
            let touched = (0..d.k()).filter(|&k| u.0 & d.component_mask(k) != 0).count();
            prop_assert!(touched <= 1);
            prop_assert!(d.h_value(u) <= 1.0);
        }
    }

    #[test]
    fn product_form_matches_balance_solve((g, sigma) in graph_with_sigma()) {
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::from_sigma(sigma).unwrap();
        let a = product_form(&ss, &rates).unwrap();
        let b = exact_stationary_solve(&ss, &rates).unwrap();
        let sup = a.pi.iter().zip(&b.pi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(sup <= 1e-10, "sup-norm {}", sup);
        prop_assert!(balance_residual(&ss, &rates, &a.pi) < 1e-12);
    }

    #[test]
    fn detailed_balance_on_every_edge(
        (g, sigma) in graph_with_sigma(),
        deact in 0.2f64..5.0,
    ) {
        let ss = enumerate_state_space(&g).unwrap();
        let nu: Vec<f64> = sigma.iter().map(|s| s * deact).collect();
        let rates = FixedRates::new(nu, vec![deact; g.n_nodes()]).unwrap();
        let d = product_form(&ss, &rates).unwrap();
        for u in 0..ss.len() {
            for m in ss.moves(u) {
                let back = ss.moves(m.to).find(|b| b.to == u).unwrap();
                let lhs = d.pi[u] * rates.rate(m);
                let rhs = d.pi[m.to] * rates.rate(back);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
            }
        }
    }

    #[test]
    fn stable_rates_meet_activity_requirement(
        (g, sigma) in graph_with_sigma(),
        fractions in proptest::collection::vec(0.01f64..0.999, 8),
    ) {
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::from_sigma(sigma.clone()).unwrap();
        let d = product_form(&ss, &rates).unwrap();
        let loads: Vec<f64> = (0..g.n_nodes()).map(|i| d.theta[i] * fractions[i]).collect();
        prop_assert!(stability_check(&d, &loads).unwrap().stable);
        let tp = TrafficProfile::from_loads(loads).unwrap();
        for clique in enumerate_cliques(&g, None) {
            for &i in &clique {
                let need = activity_factor_requirement(&tp, &clique, i).unwrap();
                prop_assert!(sigma[i] >= need * (1.0 - 1e-12), "σ_{} = {} < {}", i, sigma[i], need);
            }
        }
    }
}

/// Activity factors per component and stable component loads.
fn stable_partite(
    spec: &TopologySpec,
    sigma: &[f64],
    fractions: &[f64],
) -> (StateSpace, PartiteDecomposition, FixedRates, StationaryDistribution, TrafficProfile) {
    let g = build_topology(spec).unwrap();
    let ss = enumerate_state_space(&g).unwrap();
    let d = partite_decomposition(&g, None).unwrap();
    let node_sigma: Vec<f64> = (0..g.n_nodes()).map(|i| sigma[d.component_of(i)]).collect();
    let rates = FixedRates::from_sigma(node_sigma).unwrap();
    let dist = product_form(&ss, &rates).unwrap();
    let rho_hat: Vec<f64> = (0..d.k())
        .map(|k| {
            let theta = d.component(k).iter().map(|&i| dist.theta[i]).fold(f64::INFINITY, f64::min);
            theta * fractions[k]
        })
        .collect();
    let tp = TrafficProfile::from_component_loads(&d, &rho_hat).unwrap();
    (ss, d, rates, dist, tp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixing_bound_never_exceeds_exact_mixing_time(
        (spec, sigma, fractions) in partite_instance(),
        epsilon in 0.01f64..0.4,
    ) {
        let (ss, d, rates, dist, tp) = stable_partite(&spec, &sigma, &fractions);
        let mut candidates = component_candidates(&ss, &d);
        let weights = vec![1.0; tp.n_nodes()];
        for k in 0..d.k() {
            if let Ok(ps) = partite_sets(&ss, &d, &tp, &weights, &[d.component(k)[0]]) {
                candidates.extend(path_candidates(&ps));
            }
        }
        let bound = prop2_bound(&ss, &dist, &rates, &candidates, epsilon, tp.rho_total).unwrap();
        let exact = mixing_time(&ss, &rates, epsilon).unwrap();
        prop_assert!(bound.value <= exact.t_mix, "{} > {}", bound.value, exact.t_mix);
        let curve = &exact.d_curve;
        prop_assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
    }

    #[test]
    fn complete_partite_closed_form_is_dominated(
        sizes in proptest::collection::vec(1usize..=3, 2..=3),
        sigma in proptest::collection::vec(0.2f64..20.0, 3),
        fractions in proptest::collection::vec(0.2f64..0.95, 3),
    ) {
        let spec = TopologySpec::CompletePartite { sizes };
        let (ss, d, rates, dist, tp) = stable_partite(&spec, &sigma, &fractions);
        let candidates = component_candidates(&ss, &d);
        let weights = vec![1.0; tp.n_nodes()];
        for k in 0..d.k() {
            let nodes = d.component(k).to_vec();
            let closed = thm2_bound(&d, &tp, &weights, &nodes).unwrap();
            let exact = prop1_bound(&ss, &dist, &rates, &tp, &weights, &nodes, &candidates).unwrap();
            prop_assert!(closed.value <= exact.value * (1.0 + 1e-9), "V{}: {} > {}", k + 1, closed.value, exact.value);
        }
    }

    #[test]
    fn lemma2_sandwich_on_stable_rates(
        sizes in proptest::collection::vec(1usize..=3, 2..=3),
        sigma in proptest::collection::vec(0.2f64..20.0, 3),
        fractions in proptest::collection::vec(0.2f64..0.95, 3),
    ) {
        let spec = TopologySpec::CompletePartite { sizes };
        let (ss, d, rates, dist, tp) = stable_partite(&spec, &sigma, &fractions);
        let structure = compute_zeta(&ss, &d).unwrap();
        let diag = lemma_diagnostics(&ss, &dist, &rates, &d, &structure, &tp, 0.1).unwrap();
        for c in diag.checks.iter().filter(|c| c.name.starts_with("lemma2")) {
            prop_assert!(c.holds, "{:?}", c);
        }
        prop_assert!(diag.has_group("lemma2"));
    }

    #[test]
    fn single_server_and_h_bounds_restate_via_little(
        loads in proptest::collection::vec(0.01f64..0.3, 3),
        mu in 0.5f64..2.0,
    ) {
        let lambda: Vec<f64> = loads.iter().map(|r| r * mu).collect();
        let tp = TrafficProfile::new(lambda, vec![mu; 3]).unwrap();
        let clique = [0usize, 1, 2];
        let eq2 = clique_load_bound(&tp, &clique).unwrap();
        let total: f64 = tp.lambda.iter().sum();
        prop_assert!((eq2.delay_equivalent.unwrap() * total - eq2.value).abs() <= 1e-12 * eq2.value);
        let linear = RateFamily::Polynomial { a: 1.0, c: 1.0 };
        let h = thm1_h_bound(&tp, &clique, &linear).unwrap();
        let rho_c: f64 = loads.iter().sum();
        prop_assert!((h.value - rho_c / (3.0 * (1.0 - rho_c))).abs() <= 1e-12 * h.value);
        let f = thm1_concave_f(&tp, &clique, &linear, &[1.0; 3]).unwrap();
        prop_assert!((f.delay_equivalent.unwrap() * total - f.value).abs() <= 1e-12 * f.value);
    }
}

#[test]
fn bounds_are_monotone_in_load() {
    let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![3, 3] }).unwrap();
    let ss = enumerate_state_space(&g).unwrap();
    let d = partite_decomposition(&g, None).unwrap();
    let s = compute_zeta(&ss, &d).unwrap();
    let gamma = 0.2;
    let grid: Vec<f64> = (0..200).map(|j| 0.5 + 0.4995 * j as f64 / 199.0).collect();
    let base = TrafficProfile::symmetric(&d, 0.99).unwrap();
    let ps = partite_sets(&ss, &d, &base, &[1.0; 6], &[0]).unwrap();
    let ps_min = h_star_min(&ss, &d, &base, &[1.0; 6]).unwrap();
    let mut last = [f64::NEG_INFINITY; 6];
    for &rho in &grid {
        let tp = TrafficProfile::symmetric(&d, rho).unwrap();
        let mut values = vec![
            thm2_symmetric(&d, &tp).unwrap().log10_value,
            thm2_bound(&d, &tp, &[1.0; 6], &[0, 1, 2]).unwrap().log10_value,
            thm3_bound(&d, &tp, 0.01).unwrap().log10_value,
            clique_load_bound(&tp, &[0, 3]).unwrap().log10_value,
        ];
        if rho >= rho_gamma(s.zeta, gamma, tp.rho_min) {
            values.push(thm4_bound(&ps, &d, &tp, s.zeta, gamma).unwrap().log10_value);
            values.push(thm5_bound(ps_min.h_star, &d, &tp, s.zeta, gamma, 0.01).unwrap().log10_value);
        } else {
            values.extend([f64::NEG_INFINITY; 2]);
        }
        for (j, v) in values.iter().enumerate() {
            assert!(*v >= last[j] - 1e-12, "bound {j} decreased at ρ = {rho}");
            last[j] = *v;
        }
    }
    assert!(last.iter().all(|v| v.is_finite()));
}
