//! Maximin paths of `H` through the state graph and the sets built on them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::generic::drift_set;
use super::report::Candidate;
use super::traffic::TrafficProfile;
use crate::error::{Error, Result};
use crate::topology::{PartiteDecomposition, StateSet, StateSpace};

/// Component containing every node of `nodes`.
pub(crate) fn common_component(d: &PartiteDecomposition, nodes: &[usize]) -> Result<usize> {
    let first = *nodes.first().ok_or_else(|| Error::Domain("node subset S is empty".into()))?;
    if let Some(&i) = nodes.iter().find(|&&i| i >= d.n_nodes()) {
        return Err(Error::Domain(format!("node {i} out of range")));
    }
    let k = d.component_of(first);
    if let Some(&i) = nodes.iter().find(|&&i| d.component_of(i) != k) {
        return Err(Error::Domain(format!(
            "S must lie in one component: node {i} is in V{}, node {first} in V{}",
            d.component_of(i) + 1,
            k + 1
        )));
    }
    Ok(k)
}

#[derive(PartialEq)]
struct Entry {
    key: f64,
    state: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Larger key first; among equal keys the smaller ordinal first.
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `max_{u ∈ sources} M(u, v)` for every state `v`, with `M(u, u) = +∞`.
///
/// Best-first widest-path search: each state is settled with the largest
/// achievable path minimum of `H`.
pub fn maximin_paths(ss: &StateSpace, d: &PartiteDecomposition, sources: &StateSet) -> Vec<f64> {
    let h: Vec<f64> = ss.states().iter().map(|&u| d.h_value(u)).collect();
    let mut best = vec![f64::NEG_INFINITY; ss.len()];
    let mut done = vec![false; ss.len()];
    let mut heap = BinaryHeap::new();
    for s in sources.iter() {
        best[s] = h[s];
        heap.push(Entry { key: h[s], state: s });
    }
    while let Some(Entry { key, state }) = heap.pop() {
        if done[state] {
            continue;
        }
        done[state] = true;
        for m in ss.moves(state) {
            let cand = key.min(h[m.to]);
            if !done[m.to] && cand > best[m.to] {
                best[m.to] = cand;
                heap.push(Entry { key: cand, state: m.to });
            }
        }
    }
    for s in sources.iter() {
        best[s] = f64::INFINITY;
    }
    best
}

/// Full `M(u, v)` table; quadratic in `|Ω|`, intended for small spaces.
pub fn maximin_table(ss: &StateSpace, d: &PartiteDecomposition) -> Vec<Vec<f64>> {
    (0..ss.len())
        .map(|u| maximin_paths(ss, d, &StateSet::from_indices(ss.len(), [u])))
        .collect()
}

/// States of `set` with a transition leaving `set`.
pub fn boundary(ss: &StateSpace, set: &StateSet) -> Vec<usize> {
    set.iter()
        .filter(|&u| ss.moves(u).any(|m| !set.contains(m.to)))
        .collect()
}

/// Drift and path sets for one node subset `S ⊆ V_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStructure {
    /// Component containing `S`.
    pub k: usize,
    pub nodes: Vec<usize>,
    pub delta_set: StateSet,
    /// `δ(S)`.
    pub delta: f64,
    /// `M(v^(l), ·)` for every component `l`.
    pub from_components: Vec<Vec<f64>>,
    /// `max_{u∈Δ(S)} M(u, ·)`.
    pub from_delta: Vec<f64>,
    /// `m_l(S)`.
    pub m: Vec<f64>,
    /// `S_l(S)` (also written `B_l(S)`).
    pub sets: Vec<StateSet>,
    pub boundaries: Vec<Vec<usize>>,
    /// `H_l(S) = max_{u∈∂S_l} H(u)`.
    pub h: Vec<f64>,
    /// `H*(S) = min_l H_l(S)`.
    pub h_star: f64,
}

pub fn partite_sets(
    ss: &StateSpace,
    d: &PartiteDecomposition,
    tp: &TrafficProfile,
    weights: &[f64],
    nodes: &[usize],
) -> Result<PathStructure> {
    let k = common_component(d, nodes)?;
    if weights.len() != tp.n_nodes() || tp.n_nodes() != d.n_nodes() {
        return Err(Error::Domain("weights, profile and decomposition disagree on N".into()));
    }
    let (delta_set, delta) = drift_set(ss, tp, weights, nodes);
    if delta_set.is_empty() {
        return Err(Error::Domain("Δ(S) is empty: the weighted load of S is not serviceable".into()));
    }
    let delta = delta.ok_or_else(|| Error::Domain("Δ(S) = Ω: S carries no weighted load".into()))?;

    let kk = d.k();
    let from_components: Vec<Vec<f64>> = (0..kk)
        .map(|l| {
            let v = ss
                .index_of(d.incidence_state(l))
                .ok_or_else(|| Error::Decomposition(format!("v^({}) is not feasible", l + 1)))?;
            Ok(maximin_paths(ss, d, &StateSet::from_indices(ss.len(), [v])))
        })
        .collect::<Result<_>>()?;
    let from_delta = maximin_paths(ss, d, &delta_set);

    let mut m = vec![f64::NEG_INFINITY; kk];
    for l in (0..kk).filter(|&l| l != k) {
        m[l] = delta_set
            .iter()
            .map(|u| from_components[l][u])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    m[k] = (0..kk).filter(|&l| l != k).map(|l| m[l]).fold(f64::NEG_INFINITY, f64::max);

    let mut sets = Vec::with_capacity(kk);
    for l in 0..kk {
        let row = if l == k { &from_delta } else { &from_components[l] };
        sets.push(StateSet::from_indices(ss.len(), (0..ss.len()).filter(|&u| row[u] > m[l])));
    }
    let boundaries: Vec<Vec<usize>> = sets.iter().map(|s| boundary(ss, s)).collect();
    let h: Vec<f64> = boundaries
        .iter()
        .map(|b| b.iter().map(|&u| d.h_value(ss.state(u))).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let h_star = h.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PathStructure {
        k,
        nodes: nodes.to_vec(),
        delta_set,
        delta,
        from_components,
        from_delta,
        m,
        sets,
        boundaries,
        h,
        h_star,
    })
}

/// `H*_min`, scanning every singleton `S = {i}`; returns the minimizing
/// structure.
pub fn h_star_min(
    ss: &StateSpace,
    d: &PartiteDecomposition,
    tp: &TrafficProfile,
    weights: &[f64],
) -> Result<PathStructure> {
    let mut best: Option<PathStructure> = None;
    for i in 0..d.n_nodes() {
        let ps = match partite_sets(ss, d, tp, weights, &[i]) {
            Ok(ps) => ps,
            // A node without weighted load has no drift set; skip it.
            Err(Error::Domain(_)) if weights[i] * tp.lambda[i] == 0.0 => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| ps.h_star < b.h_star) {
            best = Some(ps);
        }
    }
    best.ok_or_else(|| Error::Domain("no node carries weighted load".into()))
}

/// The path sets `S_l(S)` and their complements as bottleneck candidates.
pub fn path_candidates(ps: &PathStructure) -> Vec<Candidate> {
    let tag: Vec<String> = ps.nodes.iter().map(|i| i.to_string()).collect();
    let tag = tag.join("_");
    let mut out = Vec::with_capacity(2 * ps.sets.len());
    for (l, set) in ps.sets.iter().enumerate() {
        out.push(Candidate::new(format!("S{}(S={tag})", l + 1), set.clone()));
        out.push(Candidate::new(format!("not_S{}(S={tag})", l + 1), set.complement()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, enumerate_state_space, partite_decomposition, ActivityState, TopologySpec};

    fn setup(spec: TopologySpec) -> (StateSpace, PartiteDecomposition) {
        let g = build_topology(&spec).unwrap();
        (enumerate_state_space(&g).unwrap(), partite_decomposition(&g, None).unwrap())
    }

    #[test]
    fn diagonal_is_infinite_and_table_symmetric() {
        let (ss, d) = setup(TopologySpec::Grid { rows: 2, cols: 3, wrap: false });
        let t = maximin_table(&ss, &d);
        for u in 0..ss.len() {
            assert_eq!(t[u][u], f64::INFINITY);
            for v in 0..ss.len() {
                assert_eq!(t[u][v], t[v][u]);
            }
        }
    }

    #[test]
    fn single_edge_passes_through_empty() {
        let (ss, d) = setup(TopologySpec::CompletePartite { sizes: vec![1, 1] });
        let a = ss.index_of(ActivityState(0b01)).unwrap();
        let b = ss.index_of(ActivityState(0b10)).unwrap();
        let row = maximin_paths(&ss, &d, &StateSet::from_indices(ss.len(), [a]));
        assert_eq!(row[b], 0.0);
    }

    #[test]
    fn k22_between_full_components() {
        let (ss, d) = setup(TopologySpec::CompletePartite { sizes: vec![2, 2] });
        let v1 = ss.index_of(d.incidence_state(0)).unwrap();
        let v2 = ss.index_of(d.incidence_state(1)).unwrap();
        let row = maximin_paths(&ss, &d, &StateSet::from_indices(ss.len(), [v1]));
        // Every path drops through ∅.
        assert_eq!(row[v2], 0.0);
        let single = ss.index_of(ActivityState(0b0001)).unwrap();
        assert_eq!(row[single], 0.5);
    }

    #[test]
    fn complete_partite_h_recovery() {
        let (ss, d) = setup(TopologySpec::CompletePartite { sizes: vec![3, 4] });
        let tp = TrafficProfile::from_component_loads(&d, &[0.4, 0.4]).unwrap();
        let w = vec![1.0; 7];
        let ps = partite_sets(&ss, &d, &tp, &w, &[0]).unwrap();
        assert_eq!(ps.h[0], 1.0 / 3.0);
        assert_eq!(ps.h[1], 1.0 / 4.0);
        assert_eq!(ps.h_star, 1.0 / 4.0);
        for l in 0..2 {
            for &u in &ps.boundaries[l] {
                assert_eq!(ss.state(u).count(), 1);
            }
        }
        let v2 = ss.index_of(d.incidence_state(1)).unwrap();
        assert!(ps.sets[1].contains(v2));
        assert!(ps.delta_set.iter().all(|u| ps.sets[0].contains(u)));
    }

    #[test]
    fn disjoint_cliques_trivialize() {
        // Two disjoint triangles: components pick one node of each triangle.
        let g = crate::topology::InterferenceGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
        )
        .unwrap();
        let comps = vec![vec![0, 3], vec![1, 4], vec![2, 5]];
        let d = partite_decomposition(&g, Some(&comps)).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let tp = TrafficProfile::from_component_loads(&d, &[0.3, 0.3, 0.3]).unwrap();
        let ps = partite_sets(&ss, &d, &tp, &[1.0; 6], &[0]).unwrap();
        assert!(ps.h.iter().all(|&h| h == 1.0), "{:?}", ps.h);
    }
}
