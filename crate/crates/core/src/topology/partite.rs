use std::collections::VecDeque;

use super::graph::InterferenceGraph;
use super::state_space::{ActivityState, StateSpace};
use crate::error::{Error, Result};

const H_TOL: f64 = 1e-12;

/// Split of the node set into `K` mutually independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct PartiteDecomposition {
    n: usize,
    components: Vec<Vec<usize>>,
    masks: Vec<u64>,
    component_of: Vec<usize>,
    complete: bool,
}

impl PartiteDecomposition {
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &[usize] {
        &self.components[k]
    }

    pub fn component_mask(&self, k: usize) -> u64 {
        self.masks[k]
    }

    /// Index of the component holding `node`.
    pub fn component_of(&self, node: usize) -> usize {
        self.component_of[node]
    }

    /// Number of components `K`.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Component sizes `M_k`.
    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    pub fn size(&self, k: usize) -> usize {
        self.components[k].len()
    }

    /// Largest component size `M`.
    pub fn max_size(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Second-largest component size `M*` (0 when `K = 1`).
    pub fn second_size(&self) -> usize {
        let mut s = self.sizes();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s.get(1).copied().unwrap_or(0)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// True when every cross-component pair interferes (complete K-partite graph).
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Incidence state `v^(k)` of component `k`.
    pub fn incidence_state(&self, k: usize) -> ActivityState {
        ActivityState(self.masks[k])
    }

    /// `H(u) = Σ_k |u ∩ V_k| / M_k`.
    pub fn h_value(&self, u: ActivityState) -> f64 {
        self.masks
            .iter()
            .zip(&self.components)
            .map(|(&m, c)| (u.0 & m).count_ones() as f64 / c.len() as f64)
            .sum()
    }
}

/// Validates (or derives) a partite decomposition of `g`.
///
/// With `components = None` the graph's natural split is used (the parts of a
/// complete partite graph, the parity colouring of a grid), falling back to a
/// breadth-first two-colouring.
pub fn partite_decomposition(
    g: &InterferenceGraph,
    components: Option<&[Vec<usize>]>,
) -> Result<PartiteDecomposition> {
    let n = g.n_nodes();
    let comps: Vec<Vec<usize>> = match components {
        Some(c) => c.to_vec(),
        None => match g.natural_components() {
            Some(c) => c.to_vec(),
            None => two_colouring(g)?,
        },
    };

    let mut component_of = vec![usize::MAX; n];
    for (k, c) in comps.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::Decomposition(format!("component {k} is empty")));
        }
        for &i in c {
            if i >= n {
                return Err(Error::Decomposition(format!("node {i} is out of range")));
            }
            if component_of[i] != usize::MAX {
                return Err(Error::Decomposition(format!("node {i} appears in two components")));
            }
            component_of[i] = k;
        }
    }
    if let Some(i) = component_of.iter().position(|&k| k == usize::MAX) {
        return Err(Error::Decomposition(format!("node {i} is in no component")));
    }
    for &(a, b) in g.edges() {
        if component_of[a] == component_of[b] {
            return Err(Error::NotIndependent {
                component: component_of[a],
                a,
                b,
            });
        }
    }

    let masks: Vec<u64> = comps
        .iter()
        .map(|c| c.iter().fold(0u64, |m, &i| m | 1 << i))
        .collect();
    let k = comps.len();
    for node in 0..n {
        if !in_transversal_clique(g, &masks, component_of[node], node) {
            return Err(Error::CliqueCondition { node, k });
        }
    }
    let complete = (0..n).all(|a| {
        (a + 1..n).all(|b| component_of[a] == component_of[b] || g.has_edge(a, b))
    });
    Ok(PartiteDecomposition {
        n,
        components: comps,
        masks,
        component_of,
        complete,
    })
}

fn two_colouring(g: &InterferenceGraph) -> Result<Vec<Vec<usize>>> {
    let n = g.n_nodes();
    let mut colour = vec![u8::MAX; n];
    for root in 0..n {
        if colour[root] != u8::MAX {
            continue;
        }
        colour[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if colour[v] == u8::MAX {
                    colour[v] = 1 - colour[u];
                    queue.push_back(v);
                } else if colour[v] == colour[u] {
                    return Err(Error::Decomposition(format!(
                        "graph is not bipartite (odd cycle through edge ({u}, {v})); \
                         supply an explicit partition"
                    )));
                }
            }
        }
    }
    let a: Vec<usize> = (0..n).filter(|&i| colour[i] == 0).collect();
    let b: Vec<usize> = (0..n).filter(|&i| colour[i] == 1).collect();
    Ok(if b.is_empty() { vec![a] } else { vec![a, b] })
}

// Is there a clique containing `node` with exactly one member in every component?
fn in_transversal_clique(g: &InterferenceGraph, masks: &[u64], own: usize, node: usize) -> bool {
    fn search(g: &InterferenceGraph, masks: &[u64], order: &[usize], allowed: u64) -> bool {
        match order.split_first() {
            None => true,
            Some((&k, rest)) => {
                let mut cand = masks[k] & allowed;
                while cand != 0 {
                    let v = cand.trailing_zeros() as usize;
                    cand &= cand - 1;
                    if search(g, masks, rest, allowed & g.neighbor_mask(v)) {
                        return true;
                    }
                }
                false
            }
        }
    }
    let order: Vec<usize> = (0..masks.len()).filter(|&k| k != own).collect();
    search(g, masks, &order, g.neighbor_mask(node))
}

/// `H(u)` for a decomposition; equals 1 exactly on the incidence states.
pub fn h_value(u: ActivityState, d: &PartiteDecomposition) -> f64 {
    d.h_value(u)
}

/// ζ, the dominant states Ω* and the largest off-Ω* value of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralCoefficients {
    pub zeta: f64,
    /// Ordinals of `v^(1), ..., v^(K)` in the state space.
    pub omega_star: Vec<usize>,
    pub h_max_off_star: f64,
    /// A state attaining `h_max_off_star`.
    pub argmax: usize,
}

impl StructuralCoefficients {
    pub fn is_dominant(&self, idx: usize) -> bool {
        self.omega_star.contains(&idx)
    }
}

/// Scans Ω \ Ω* for the largest `H`, checking that `H ≤ 1` everywhere with
/// equality only on Ω*.
pub fn compute_zeta(ss: &StateSpace, d: &PartiteDecomposition) -> Result<StructuralCoefficients> {
    let omega_star: Vec<usize> = (0..d.k())
        .map(|k| {
            ss.index_of(d.incidence_state(k))
                .ok_or_else(|| Error::Decomposition(format!("v^({}) is not feasible", k + 1)))
        })
        .collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 0;
    for (idx, &u) in ss.states().iter().enumerate() {
        let h = d.h_value(u);
        let dominant = omega_star.contains(&idx);
        if h > 1.0 + H_TOL || (!dominant && h >= 1.0 - H_TOL) {
            return Err(Error::AssumptionViolated {
                witness: u.to_bits(ss.n_nodes()),
                h,
            });
        }
        if !dominant && h > best {
            best = h;
            argmax = idx;
        }
    }
    Ok(StructuralCoefficients {
        zeta: 1.0 - best,
        omega_star,
        h_max_off_star: best,
        argmax,
    })
}
