//! Interference graphs, their independent-set state spaces, cliques and
//! K-partite structure.

mod cliques;
mod graph;
mod partite;
mod state_space;

pub use cliques::{enumerate_cliques, is_clique};
pub use graph::{build_topology, InterferenceGraph, TopologySpec, MAX_NODES};
pub use partite::{
    compute_zeta, h_value, partite_decomposition, PartiteDecomposition, StructuralCoefficients,
};
pub use state_space::{
    enumerate_state_space, enumerate_state_space_capped, ActivityState, Move, StateSet,
    StateSpace, DEFAULT_STATE_CAP,
};
