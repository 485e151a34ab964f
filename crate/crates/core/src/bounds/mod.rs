//! Lower bounds on queue lengths, delays and mixing times.
//!
//! Every bound returns a [`BoundReport`] carrying the value, its `log10`, a
//! vacuity flag and the witness it was evaluated on.

mod extension;
mod generic;
mod partite;
mod paths;
mod queue;
mod rates;
mod report;
mod traffic;

pub use extension::{
    lemma_diagnostics, min_admissible_gamma, rho_gamma, thm4_bound, thm5_bound, LemmaCheck,
    LemmaDiagnostics,
};
pub use generic::{
    component_candidates, drift_coefficients, prop1_bound, prop2_bound,
    singleton_complement_candidates, DriftCoefficients,
};
pub use partite::{thm2_bound, thm2_symmetric, thm2_symmetric_bound, thm3_bound};
pub use paths::{
    boundary, h_star_min, maximin_paths, maximin_table, partite_sets, path_candidates,
    PathStructure,
};
pub use queue::{
    activity_factor_requirement, clique_load_bound, clique_queueing_term, sum_over_cover,
    thm1_concave_f, thm1_convex_g, thm1_h_bound, transversal_clique_cover,
};
pub use rates::{invert_increasing, RateFamily, Shape};
pub use report::{BoundKind, BoundReport, BoundTarget, Candidate, Witness};
pub use traffic::TrafficProfile;
