//! Bottleneck-ratio bounds valid for any fixed-rate configuration.

use super::report::{BoundKind, BoundReport, BoundTarget, Candidate, Witness};
use super::traffic::TrafficProfile;
use crate::error::{Error, Result};
use crate::stationary::{subset_analysis, FixedRates, StationaryDistribution};
use crate::topology::{PartiteDecomposition, StateSet, StateSpace};

/// Drift quantities of the weighted queue of a node subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCoefficients {
    pub weights: Vec<f64>,
    pub nodes: Vec<usize>,
    /// `Y(w, S, B) = max_{u∈B} Σ_{i∈S} w_i μ_i u_i`.
    pub y: f64,
    /// `D(w, S, B) = Σ_{i∈S} w_i λ_i − Y`.
    pub d: f64,
    /// `Δ(S)`: states whose weighted service rate covers the weighted arrivals.
    pub delta_set: StateSet,
    /// `δ(S)`; `None` when `Δ(S) = Ω`.
    pub delta: Option<f64>,
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::Domain(format!("{} weights for {n} nodes", weights.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    Ok(())
}

fn check_nodes(nodes: &[usize], n: usize) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Domain("node subset S is empty".into()));
    }
    if let Some(&i) = nodes.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("node {i} out of range")));
    }
    Ok(())
}

/// Weighted service rate `Σ_{i∈S} w_i μ_i u_i` of every state.
pub(crate) fn service_rates(ss: &StateSpace, tp: &TrafficProfile, weights: &[f64], nodes: &[usize]) -> Vec<f64> {
    ss.states()
        .iter()
        .map(|u| {
            nodes
                .iter()
                .filter(|&&i| u.is_active(i))
                .map(|&i| weights[i] * tp.mu[i])
                .sum()
        })
        .collect()
}

/// `Δ(S)` and `δ(S)` over the whole state space.
pub(crate) fn drift_set(
    ss: &StateSpace,
    tp: &TrafficProfile,
    weights: &[f64],
    nodes: &[usize],
) -> (StateSet, Option<f64>) {
    let arrivals = tp.weighted_arrivals(weights, nodes);
    let service = service_rates(ss, tp, weights, nodes);
    let set = StateSet::from_indices(ss.len(), (0..ss.len()).filter(|&u| arrivals <= service[u]));
    let outside = (0..ss.len())
        .filter(|&u| !set.contains(u))
        .map(|u| service[u])
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = (outside > f64::NEG_INFINITY).then_some(arrivals - outside);
    (set, delta)
}

pub fn drift_coefficients(
    ss: &StateSpace,
    tp: &TrafficProfile,
    weights: &[f64],
    nodes: &[usize],
    subset: &StateSet,
) -> Result<DriftCoefficients> {
    check_weights(weights, tp.n_nodes())?;
    check_nodes(nodes, tp.n_nodes())?;
    if subset.is_empty() {
        return Err(Error::Domain("state subset B is empty".into()));
    }
    let service = service_rates(ss, tp, weights, nodes);
    let y = subset.iter().map(|u| service[u]).fold(f64::NEG_INFINITY, f64::max);
    let d = tp.weighted_arrivals(weights, nodes) - y;
    let (delta_set, delta) = drift_set(ss, tp, weights, nodes);
    Ok(DriftCoefficients {
        weights: weights.to_vec(),
        nodes: nodes.to_vec(),
        y,
        d,
        delta_set,
        delta,
    })
}

/// `Σ_{i∈S} w_i E[L_i] ≥ ½ max_B D(w,S,B) π(B) / Φ(B)` over the given
/// candidates; candidates with `D ≤ 0` or empty/full sets are skipped.
#[allow(clippy::too_many_arguments)]
pub fn prop1_bound(
    ss: &StateSpace,
    dist: &StationaryDistribution,
    rates: &FixedRates,
    tp: &TrafficProfile,
    weights: &[f64],
    nodes: &[usize],
    candidates: &[Candidate],
) -> Result<BoundReport> {
    check_weights(weights, tp.n_nodes())?;
    check_nodes(nodes, tp.n_nodes())?;
    if candidates.is_empty() {
        return Err(Error::Domain("no candidate subsets".into()));
    }
    let service = service_rates(ss, tp, weights, nodes);
    let arrivals = tp.weighted_arrivals(weights, nodes);
    let mut best: Option<(f64, &Candidate, f64, f64, f64)> = None;
    for c in candidates {
        if c.set.is_empty() || c.set.is_full() {
            continue;
        }
        let y = c.set.iter().map(|u| service[u]).fold(f64::NEG_INFINITY, f64::max);
        let d = arrivals - y;
        if !(d > 0.0) {
            continue;
        }
        let a = subset_analysis(ss, dist, rates, &c.set)?;
        let value = 0.5 * d * a.pi_mass / a.bottleneck;
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, c, d, a.pi_mass, a.bottleneck));
        }
    }
    let rho = tp.rho_total;
    let target = BoundTarget::WeightedQueue;
    let unit = nodes.iter().all(|&i| weights[i] == 1.0);
    Ok(match best {
        Some((value, c, d, pi, phi)) => {
            let r = BoundReport::from_value(
                BoundKind::Prop1,
                target,
                value,
                Witness::Subset { label: c.label.clone(), size: c.set.len() },
                rho,
            )
            .with_param("drift", d)
            .with_param("pi_mass", pi)
            .with_param("bottleneck", phi);
            if unit {
                r.with_arrivals(arrivals)
            } else {
                r
            }
        }
        None => BoundReport::from_value(BoundKind::Prop1, target, 0.0, Witness::None, rho),
    })
}

/// `t_mix(ε) ≥ max_B (1 − 2ε − π(B)) / Φ(B)`, clamped at zero.
pub fn prop2_bound(
    ss: &StateSpace,
    dist: &StationaryDistribution,
    rates: &FixedRates,
    candidates: &[Candidate],
    epsilon: f64,
    rho: f64,
) -> Result<BoundReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1/2)")));
    }
    if candidates.is_empty() {
        return Err(Error::Domain("no candidate subsets".into()));
    }
    let mut best: Option<(f64, &Candidate, f64, f64)> = None;
    for c in candidates {
        if c.set.is_empty() || c.set.is_full() {
            continue;
        }
        let a = subset_analysis(ss, dist, rates, &c.set)?;
        let value = (1.0 - 2.0 * epsilon - a.pi_mass) / a.bottleneck;
        if value > 0.0 && best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, c, a.pi_mass, a.bottleneck));
        }
    }
    let target = BoundTarget::MixingTime;
    Ok(match best {
        Some((value, c, pi, phi)) => BoundReport::from_value(
            BoundKind::Prop2,
            target,
            value,
            Witness::Subset { label: c.label.clone(), size: c.set.len() },
            rho,
        )
        .with_param("epsilon", epsilon)
        .with_param("pi_mass", pi)
        .with_param("bottleneck", phi),
        None => BoundReport::from_value(BoundKind::Prop2, target, 0.0, Witness::None, rho)
            .with_param("epsilon", epsilon),
    })
}

/// `B_k = {u : some node of V_k is active}` and their complements.
pub fn component_candidates(ss: &StateSpace, d: &PartiteDecomposition) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(2 * d.k());
    for k in 0..d.k() {
        let mask = d.component_mask(k);
        let set = StateSet::from_predicate(ss, |u| u.0 & mask != 0);
        out.push(Candidate::new(format!("not_B{}", k + 1), set.complement()));
        out.push(Candidate::new(format!("B{}", k + 1), set));
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out
}

/// `Ω \ {u}` for every state `u`.
pub fn singleton_complement_candidates(ss: &StateSpace) -> Vec<Candidate> {
    (0..ss.len())
        .map(|u| {
            let mut set = StateSet::full(ss.len());
            set.remove(u);
            Candidate::new(format!("not_{}", ss.state(u).to_bits(ss.n_nodes())), set)
        })
        .collect()
}
