use super::product_form::{FixedRates, StationaryDistribution};
use crate::error::{Error, Result};
use crate::topology::{StateSet, StateSpace};

/// Stationary flow quantities of a proper subset `B` of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetAnalysis {
    pub subset: StateSet,
    /// `π(B)`.
    pub pi_mass: f64,
    /// `Q(B)`, the stationary probability flow from `B` to its complement.
    pub flow: f64,
    /// The same flow counted from the complement into `B`.
    pub flow_in: f64,
    /// Bottleneck ratio `Φ(B) = Q(B) / π(B)`.
    pub bottleneck: f64,
    /// States of `B` with at least one transition leaving `B`.
    pub boundary: Vec<usize>,
    /// Expected time spent in `B` per visit, `1 / Φ(B)`.
    pub expected_return_time: f64,
}

/// Computes `Q(B)`, `π(B)`, `Φ(B)` and `∂B` for `∅ ⊂ B ⊂ Ω`.
pub fn subset_analysis(
    ss: &StateSpace,
    dist: &StationaryDistribution,
    rates: &FixedRates,
    subset: &StateSet,
) -> Result<SubsetAnalysis> {
    if subset.universe_len() != ss.len() {
        return Err(Error::Domain("subset does not match the state space".into()));
    }
    if subset.is_empty() || subset.is_full() {
        return Err(Error::Domain(
            "bottleneck ratio needs a nonempty proper subset".into(),
        ));
    }
    let mut pi_mass = 0.0;
    let mut flow = 0.0;
    let mut flow_in = 0.0;
    let mut boundary = Vec::new();
    for u in 0..ss.len() {
        let inside = subset.contains(u);
        let mut crossing = 0.0;
        for m in ss.moves(u) {
            if subset.contains(m.to) != inside {
                crossing += rates.rate(m);
            }
        }
        if inside {
            pi_mass += dist.pi[u];
            flow += dist.pi[u] * crossing;
            if crossing > 0.0 {
                boundary.push(u);
            }
        } else {
            flow_in += dist.pi[u] * crossing;
        }
    }
    let bottleneck = flow / pi_mass;
    Ok(SubsetAnalysis {
        subset: subset.clone(),
        pi_mass,
        flow,
        flow_in,
        bottleneck,
        boundary,
        expected_return_time: 1.0 / bottleneck,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::product_form;
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    #[test]
    fn k55_b1_flow() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![5, 5] }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::uniform(10, 1.0).unwrap();
        let dist = product_form(&ss, &rates).unwrap();
        let b1 = StateSet::from_predicate(&ss, |u| u.0 & 0b11111 != 0);
        let a = subset_analysis(&ss, &dist, &rates, &b1).unwrap();
        assert!((a.flow - 5.0 / 63.0).abs() < 1e-15);
        assert!((a.flow - a.flow_in).abs() < 1e-15);
        assert_eq!(a.boundary.len(), 5);
        assert!((a.expected_return_time * a.bottleneck - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_edge() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![1, 1] }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::uniform(2, 1.0).unwrap();
        let dist = product_form(&ss, &rates).unwrap();
        let b = StateSet::from_predicate(&ss, |u| u.0 == 0b01);
        let a = subset_analysis(&ss, &dist, &rates, &b).unwrap();
        assert!((a.pi_mass - 1.0 / 3.0).abs() < 1e-15);
        assert!((a.flow - 1.0 / 3.0).abs() < 1e-15);
        assert!((a.bottleneck - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_full_rejected() {
        let g = build_topology(&TopologySpec::Line { n: 2 }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::uniform(2, 1.0).unwrap();
        let dist = product_form(&ss, &rates).unwrap();
        for s in [StateSet::empty(ss.len()), StateSet::full(ss.len())] {
            assert!(matches!(subset_analysis(&ss, &dist, &rates, &s), Err(Error::Domain(_))));
        }
    }
}
