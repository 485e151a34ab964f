//! Exact identities measured on simulated trajectories.

use super::estimate::{estimate_mean_queue_with, EstimateOptions, SimEstimate};
use super::strategy::Strategy;
use crate::bounds::{clique_queueing_term, TrafficProfile};
use crate::error::{Error, Result};
use crate::topology::InterferenceGraph;

fn relative_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Both sides of the clique decomposition
/// `Σ E[L_i] = λ_C Σ(λ_i/μ_i²)/(1−ρ_C) + Σ E[L_{i,C}] + ρ_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub clique: Vec<usize>,
    pub lhs: f64,
    pub queueing_term: f64,
    /// `Σ_{i∈C} E[L_{i,C}]`.
    pub nonserving_sum: f64,
    pub rho_clique: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    pub estimate: SimEstimate,
}

/// Runs the doubling protocol measuring `clique` and compares both sides of
/// the decomposition on the same trajectory.
pub fn fuhrmann_cooper_check(
    g: &InterferenceGraph,
    tp: &TrafficProfile,
    strategy: &Strategy,
    clique: &[usize],
    seed: u64,
    opts: &EstimateOptions,
) -> Result<DecompositionReport> {
    let queueing_term = clique_queueing_term(tp, clique)?;
    let rho_clique = tp.rho_of(clique);
    let mut opts = opts.clone();
    opts.config.cliques = vec![clique.to_vec()];
    let estimate = estimate_mean_queue_with(g, tp, strategy, seed, &opts)?;
    let nonserving = estimate.nonserving_means[0]
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("no non-serving interval observed for the clique".into()))?;
    let nonserving_sum: f64 = nonserving.iter().sum();
    let lhs: f64 = clique.iter().map(|&i| estimate.per_node_means[i]).sum();
    let rhs = queueing_term + nonserving_sum + rho_clique;
    Ok(DecompositionReport {
        clique: clique.to_vec(),
        lhs,
        queueing_term,
        nonserving_sum,
        rho_clique,
        rhs,
        relative_gap: relative_gap(lhs, rhs),
        estimate,
    })
}

/// `Σ λ_i Ŵ_i` against `Σ L̂_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LittleReport {
    pub queue_side: f64,
    pub delay_side: f64,
    pub delays: Vec<f64>,
    pub relative_gap: f64,
}

pub fn little_check(est: &SimEstimate, tp: &TrafficProfile) -> Result<LittleReport> {
    let delays = est
        .delays
        .clone()
        .ok_or_else(|| Error::Unavailable("packet tagging was disabled or abandoned".into()))?;
    if let Some(i) = (0..tp.n_nodes()).find(|&i| tp.lambda[i] > 0.0 && est.departures[i] == 0) {
        return Err(Error::InsufficientData(format!("node {i} recorded no departures")));
    }
    let queue_side: f64 = est.per_node_means.iter().sum();
    let delay_side: f64 = tp.lambda.iter().zip(&delays).map(|(l, w)| l * w).sum();
    Ok(LittleReport { queue_side, delay_side, relative_gap: relative_gap(queue_side, delay_side), delays })
}
