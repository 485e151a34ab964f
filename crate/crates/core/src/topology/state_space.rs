use std::collections::HashMap;
use std::fmt;

use super::graph::InterferenceGraph;
use crate::error::{Error, Result};

/// Default ceiling on the number of enumerated independent sets.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

/// A joint activity vector: bit `i` set means node `i` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivityState(pub u64);

impl ActivityState {
    pub const EMPTY: ActivityState = ActivityState(0);

    pub fn from_nodes(nodes: &[usize]) -> Self {
        ActivityState(nodes.iter().fold(0u64, |m, &i| m | 1 << i))
    }

    #[inline]
    pub fn is_active(self, node: usize) -> bool {
        self.0 >> node & 1 == 1
    }

    #[inline]
    pub fn with(self, node: usize) -> Self {
        ActivityState(self.0 | 1 << node)
    }

    #[inline]
    pub fn without(self, node: usize) -> Self {
        ActivityState(self.0 & !(1 << node))
    }

    #[inline]
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn active_nodes(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// `u_1 u_2 ... u_N` as a string of `0`/`1`.
    pub fn to_bits(self, n: usize) -> String {
        (0..n).map(|i| if self.is_active(i) { '1' } else { '0' }).collect()
    }

    pub fn display(self, n: usize) -> StateDisplay {
        StateDisplay(self, n)
    }
}

pub struct StateDisplay(ActivityState, usize);

impl fmt::Display for StateDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_bits(self.1))
    }
}

/// One feasible transition out of a state of the activity process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub node: usize,
    pub to: usize,
    /// `true` for `u -> u + e_node`, `false` for `u -> u - e_node`.
    pub activation: bool,
}

/// The feasible activity states (independent sets) of a graph, in
/// lexicographic order of `u_1 u_2 ... u_N` with `0 < 1`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    adj: Vec<u64>,
    states: Vec<ActivityState>,
    index: HashMap<u64, usize>,
}

impl StateSpace {
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ActivityState] {
        &self.states
    }

    #[inline]
    pub fn state(&self, idx: usize) -> ActivityState {
        self.states[idx]
    }

    pub fn index_of(&self, u: ActivityState) -> Option<usize> {
        self.index.get(&u.0).copied()
    }

    pub fn contains(&self, u: ActivityState) -> bool {
        self.index.contains_key(&u.0)
    }

    /// Ordinal of the empty state (always 0 under the lexicographic order).
    pub fn empty_index(&self) -> usize {
        0
    }

    /// All feasible single-node transitions out of state `idx`.
    pub fn moves(&self, idx: usize) -> impl Iterator<Item = Move> + '_ {
        let u = self.states[idx].0;
        (0..self.n).filter_map(move |i| {
            if u >> i & 1 == 1 {
                Some(Move {
                    node: i,
                    to: self.index[&(u & !(1 << i))],
                    activation: false,
                })
            } else if self.adj[i] & u == 0 {
                Some(Move {
                    node: i,
                    to: self.index[&(u | 1 << i)],
                    activation: true,
                })
            } else {
                None
            }
        })
    }

    /// States with no feasible activation (maximal independent sets).
    pub fn maximal_states(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&idx| {
                let u = self.states[idx].0;
                (0..self.n).all(|i| u >> i & 1 == 1 || self.adj[i] & u != 0)
            })
            .collect()
    }
}

/// Enumerates every independent set of `g` with the default cap.
pub fn enumerate_state_space(g: &InterferenceGraph) -> Result<StateSpace> {
    enumerate_state_space_capped(g, DEFAULT_STATE_CAP)
}

/// Enumerates independent sets by branching on the lowest undecided vertex
/// (exclude first, then include), which yields lexicographic order directly.
pub fn enumerate_state_space_capped(g: &InterferenceGraph, cap: usize) -> Result<StateSpace> {
    let n = g.n_nodes();
    let adj: Vec<u64> = (0..n).map(|i| g.neighbor_mask(i)).collect();
    let mut states = Vec::new();
    let mut stack: Vec<(usize, u64, u64)> = vec![(0, 0, 0)];
    // (next vertex, chosen mask, forbidden mask); exclude branch is pushed last so
    // it is explored first.
    while let Some((i, chosen, forbidden)) = stack.pop() {
        if i == n {
            if states.len() == cap {
                return Err(Error::Resource {
                    what: "state space",
                    estimate: cap + 1,
                    cap,
                });
            }
            states.push(ActivityState(chosen));
            continue;
        }
        if forbidden >> i & 1 == 0 {
            stack.push((i + 1, chosen | 1 << i, forbidden | adj[i]));
        }
        stack.push((i + 1, chosen, forbidden));
    }
    let index = states.iter().enumerate().map(|(k, s)| (s.0, k)).collect();
    Ok(StateSpace { n, adj, states, index })
}

/// A subset `B` of the state space, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSet {
    member: Vec<bool>,
}

impl StateSet {
    pub fn empty(len: usize) -> Self {
        Self { member: vec![false; len] }
    }

    pub fn full(len: usize) -> Self {
        Self { member: vec![true; len] }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for i in indices {
            s.member[i] = true;
        }
        s
    }

    pub fn from_predicate(ss: &StateSpace, mut pred: impl FnMut(ActivityState) -> bool) -> Self {
        Self {
            member: ss.states().iter().map(|&u| pred(u)).collect(),
        }
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.member[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.member[idx] = false;
    }

    pub fn universe_len(&self) -> usize {
        self.member.len()
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.member.iter().all(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            member: self.member.iter().map(|&b| !b).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, TopologySpec};

    fn space(spec: TopologySpec) -> StateSpace {
        enumerate_state_space(&build_topology(&spec).unwrap()).unwrap()
    }

    #[test]
    fn single_node() {
        let ss = space(TopologySpec::Explicit { n: 1, edges: vec![], labels: None });
        assert_eq!(ss.states(), &[ActivityState(0), ActivityState(1)]);
    }

    #[test]
    fn line3_matches_hand_enumeration() {
        let ss = space(TopologySpec::Line { n: 3 });
        let bits: Vec<String> = ss.states().iter().map(|u| u.to_bits(3)).collect();
        assert_eq!(bits, ["000", "001", "010", "100", "101"]);
    }

    #[test]
    fn k55_and_four_cycle_sizes() {
        assert_eq!(space(TopologySpec::CompletePartite { sizes: vec![5, 5] }).len(), 63);
        assert_eq!(space(TopologySpec::Grid { rows: 2, cols: 2, wrap: false }).len(), 7);
    }

    #[test]
    fn cap_is_enforced() {
        let g = build_topology(&TopologySpec::Line { n: 10 }).unwrap();
        let err = enumerate_state_space_capped(&g, 50).unwrap_err();
        assert!(matches!(err, Error::Resource { estimate: 51, cap: 50, .. }));
    }

    #[test]
    fn moves_are_symmetric() {
        let ss = space(TopologySpec::Grid { rows: 2, cols: 3, wrap: false });
        for idx in 0..ss.len() {
            for m in ss.moves(idx) {
                assert!(ss.moves(m.to).any(|back| back.to == idx && back.node == m.node));
            }
        }
    }

    #[test]
    fn maximal_states_of_k22() {
        let ss = space(TopologySpec::CompletePartite { sizes: vec![2, 2] });
        let maxi: Vec<u64> = ss.maximal_states().iter().map(|&i| ss.state(i).0).collect();
        assert_eq!(maxi.len(), 2);
        assert!(maxi.contains(&0b0011) && maxi.contains(&0b1100));
    }
}
