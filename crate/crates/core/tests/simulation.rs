//! Simulator invariants checked against exact quantities.

use csma_core::bounds::*;
use csma_core::sim::{self, *};
use csma_core::stationary::*;
use csma_core::topology::*;

fn k22() -> (InterferenceGraph, StateSpace, PartiteDecomposition) {
    let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![2, 2] }).unwrap();
    let ss = enumerate_state_space(&g).unwrap();
    let d = partite_decomposition(&g, None).unwrap();
    (g, ss, d)
}

#[test]
fn occupancy_converges_to_product_form() {
    for spec in [
        TopologySpec::CompletePartite { sizes: vec![2, 2] },
        TopologySpec::Line { n: 4 },
        TopologySpec::CompletePartite { sizes: vec![5, 5] },
    ] {
        let g = build_topology(&spec).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        assert!(ss.len() <= 63);
        let n = g.n_nodes();
        let sigma: Vec<f64> = (0..n).map(|i| 0.5 + 0.25 * i as f64).collect();
        let rates = FixedRates::from_sigma(sigma).unwrap();
        let dist = product_form(&ss, &rates).unwrap();
        let tp = TrafficProfile::new(vec![0.0; n], vec![1.0; n]).unwrap();
        let config = SimConfig { record_occupancy: true, ..SimConfig::default() };
        let t = simulate(&g, &tp, &Strategy::from_fixed_rates(&rates), 1e6, 21, config).unwrap();
        let mut tv = 0.0;
        let mut chi = 0.0;
        for (idx, u) in ss.states().iter().enumerate() {
            let p = t.accumulators.occupancy.get(&u.0).copied().unwrap_or(0.0) / t.horizon;
            tv += 0.5 * (p - dist.pi[idx]).abs();
            chi += (p - dist.pi[idx]).powi(2) / dist.pi[idx];
        }
        assert!(tv < 0.01, "{spec:?}: total variation {tv}");
        assert!(chi < 1e-3, "{spec:?}: chi-square distance {chi}");
        assert!(t.accumulators.occupancy.keys().all(|&u| g.is_independent(u)));
    }
}

#[test]
fn trajectories_stay_feasible() {
    let g = build_topology(&TopologySpec::Grid { rows: 3, cols: 3, wrap: false }).unwrap();
    let tp = TrafficProfile::new(vec![0.05; 9], vec![1.0; 9]).unwrap();
    for strategy in [
        Strategy::fixed(9, 1.5, 1.0),
        Strategy::queue_based(9, QueueFn::identity(), QueueFn::constant(1.0)),
    ] {
        let mut s = Simulator::new(&g, &tp, &strategy, 8, SimConfig::default()).unwrap();
        for step in 1..=2000 {
            s.run_until(step as f64).unwrap();
            assert!(g.is_independent(s.state().activity.0));
        }
        let acc = s.accumulators();
        for i in 0..9 {
            let held = acc.arrivals[i] - acc.departures[i];
            assert_eq!(held, s.state().queues[i]);
        }
    }
}

#[test]
fn dummy_completions_do_not_depart() {
    let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![1] }).unwrap();
    let tp = TrafficProfile::new(vec![0.0], vec![1.0]).unwrap();
    let t = simulate(&g, &tp, &Strategy::fixed(1, 1.0, 0.5), 1e4, 2, SimConfig::default()).unwrap();
    assert_eq!(t.accumulators.departures[0], 0);
    assert!(t.stats.theta_hat[0] > 0.5);
}

#[test]
fn busy_active_node_departs_at_service_rate() {
    // Overloaded node: the buffer stays non-empty, so every completion departs.
    let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![1] }).unwrap();
    let tp = TrafficProfile::new(vec![2.0], vec![1.0]).unwrap();
    let config = SimConfig { tag_packets: false, ..SimConfig::default() };
    let t = simulate(&g, &tp, &Strategy::fixed(1, 1.0, 0.4), 4e5, 6, config).unwrap();
    let rate = t.accumulators.departures[0] as f64 / t.accumulators.active_time[0];
    assert!((rate - 1.0).abs() < 0.01, "{rate}");
    // Activity periods: mean 1/0.4 on, 1/ν = 1 off.
    assert!((t.stats.theta_hat[0] - 2.5 / 3.5).abs() < 0.01);
}

#[test]
fn little_law_on_converged_run() {
    let (g, _, d) = k22();
    let tp = TrafficProfile::symmetric(&d, 0.6).unwrap();
    let opts = EstimateOptions { initial_horizon: 2e5, ..Default::default() };
    let e = estimate_mean_queue_with(&g, &tp, &Strategy::fixed(4, 3.0, 1.0), 5, &opts).unwrap();
    assert!(e.converged);
    let l = little_check(&e, &tp).unwrap();
    assert!(l.relative_gap < 0.05, "{l:?}");
}

#[test]
fn fixed_rate_simulation_dominates_bounds() {
    let (g, ss, d) = k22();
    let sigma = 3.0;
    let rates = FixedRates::uniform(4, sigma).unwrap();
    let dist = product_form(&ss, &rates).unwrap();
    let tp = TrafficProfile::symmetric(&d, 0.6).unwrap();
    assert!(stability_check(&dist, &tp.rho).unwrap().stable);
    let opts = EstimateOptions { initial_horizon: 2e5, ..Default::default() };
    let e = estimate_mean_queue_with(&g, &tp, &Strategy::from_fixed_rates(&rates), 13, &opts).unwrap();
    assert!(e.converged);
    let w = vec![1.0; 4];
    let candidates = component_candidates(&ss, &d);
    let cover = transversal_clique_cover(&d).unwrap();
    let eq2: Vec<BoundReport> = cover.iter().map(|c| clique_load_bound(&tp, c).unwrap()).collect();
    let aggregate = [
        sum_over_cover(&eq2).unwrap(),
        thm2_bound(&d, &tp, &w, &[0, 1]).unwrap(),
        prop1_bound(&ss, &dist, &rates, &tp, &w, &[0, 1], &candidates).unwrap(),
    ];
    for b in aggregate.iter().filter(|b| !b.vacuous) {
        assert!(e.mean_total_queue >= b.value, "{:?} {} > {}", b.kind, b.value, e.mean_total_queue);
    }
    let per_node = thm2_symmetric(&d, &tp).unwrap();
    for &m in &e.per_node_means {
        assert!(m >= per_node.value);
    }
}

#[test]
fn queue_based_simulation_dominates_clique_bounds() {
    let (g, _, d) = k22();
    let tp = TrafficProfile::symmetric(&d, 0.7).unwrap();
    let strategy = Strategy::queue_based(4, QueueFn::identity(), QueueFn::constant(1.0));
    let opts = EstimateOptions { initial_horizon: 2e5, ..Default::default() };
    let e = sim::estimate_mean_queue_with(&g, &tp, &strategy, 17, &opts).unwrap();
    assert!(e.converged);
    let family = RateFamily::Polynomial { a: 1.0, c: 1.0 };
    let cover = transversal_clique_cover(&d).unwrap();
    let thm1: Vec<BoundReport> =
        cover.iter().map(|c| thm1_concave_f(&tp, c, &family, &[1.0; 4]).unwrap()).collect();
    let total = sum_over_cover(&thm1).unwrap();
    assert!(e.mean_total_queue >= total.value, "{} < {}", e.mean_total_queue, total.value);
}
