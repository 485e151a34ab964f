//! Closed-form bounds for complete partite interference graphs.

use super::report::{BoundKind, BoundReport, BoundTarget, Witness};
use super::traffic::TrafficProfile;
use crate::error::{Error, Result};
use crate::topology::PartiteDecomposition;

fn check_partite_profile(d: &PartiteDecomposition, tp: &TrafficProfile) -> Result<()> {
    if tp.rho_hat.len() != d.k() {
        return Err(Error::Domain(
            "traffic profile carries no component loads for this decomposition".into(),
        ));
    }
    if !(tp.rho_total < 1.0) {
        return Err(Error::InfeasibleLoad { rho_clique: tp.rho_total });
    }
    Ok(())
}

fn require_complete(d: &PartiteDecomposition) -> Result<()> {
    if !d.is_complete() {
        return Err(Error::WrongTopology(
            "bound requires a complete partite interference graph".into(),
        ));
    }
    Ok(())
}

fn log10_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// General form on a complete partite graph:
/// `Σ_{i∈S} w_i E[L_i] > (1/(2M)) ρ_min^{M+1} Σ_{i∈S} w_i λ_i (1/(1−ρ))^{M−1}`
/// for `S` inside one component.
pub fn thm2_bound(
    d: &PartiteDecomposition,
    tp: &TrafficProfile,
    weights: &[f64],
    nodes: &[usize],
) -> Result<BoundReport> {
    require_complete(d)?;
    check_partite_profile(d, tp)?;
    let k = super::paths::common_component(d, nodes)?;
    let m = d.max_size() as f64;
    let rho = tp.rho_total;
    let arrivals = tp.weighted_arrivals(weights, nodes);
    let log10 = -(2.0 * m).log10()
        + (m + 1.0) * log10_or_neg_inf(tp.rho_min)
        + log10_or_neg_inf(arrivals)
        - (m - 1.0) * (1.0 - rho).log10();
    let unit = nodes.iter().all(|&i| weights[i] == 1.0);
    let r = BoundReport::from_log10(
        BoundKind::Thm2,
        BoundTarget::WeightedQueue,
        log10,
        Witness::NodeSet { component: k, nodes: nodes.to_vec() },
        rho,
    )
    .with_param("exponent", m - 1.0);
    Ok(if unit { r.with_arrivals(arrivals) } else { r })
}

/// Symmetric per-node form (`M_k ≡ M`, `ρ̂_k ≡ ρ/K`):
/// `E[L_i] > (K−1)² ρ^{M+2} / (2 M K^{M+1} (K − (K−1)ρ)) · (1/(1−ρ))^{M−1}`.
pub fn thm2_symmetric_bound(k: usize, m: usize, rho: f64) -> Result<BoundReport> {
    if k < 1 || m < 1 {
        return Err(Error::Domain("need K ≥ 1 and M ≥ 1".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("ρ = {rho} must lie in [0, 1)")));
    }
    let (kf, mf) = (k as f64, m as f64);
    let log10 = 2.0 * log10_or_neg_inf(kf - 1.0) + (mf + 2.0) * log10_or_neg_inf(rho)
        - (2.0 * mf).log10()
        - (mf + 1.0) * kf.log10()
        - (kf - (kf - 1.0) * rho).log10()
        - (mf - 1.0) * (1.0 - rho).log10();
    Ok(
        BoundReport::from_log10(BoundKind::Thm2, BoundTarget::PerNodeQueue, log10, Witness::None, rho)
            .with_param("K", kf)
            .with_param("M", mf)
            .with_param("exponent", mf - 1.0)
            .with_arrivals(rho / kf),
    )
}

/// Symmetric per-node form after checking the decomposition and loads.
pub fn thm2_symmetric(d: &PartiteDecomposition, tp: &TrafficProfile) -> Result<BoundReport> {
    require_complete(d)?;
    check_partite_profile(d, tp)?;
    let m = d.size(0);
    if d.sizes().iter().any(|&s| s != m) {
        return Err(Error::WrongTopology("symmetric form needs equal component sizes".into()));
    }
    let share = tp.rho_total / d.k() as f64;
    if tp.rho_hat.iter().any(|&r| (r - share).abs() > 1e-12) {
        return Err(Error::Domain("symmetric form needs ρ̂_k = ρ / K".into()));
    }
    thm2_symmetric_bound(d.k(), m, tp.rho_total)
}

/// `t_mix(ε) > ((K−1)ρ_min − 2ε) (ρ_min^M / M) (1/(1−ρ))^{M−1}`, clamped at 0.
pub fn thm3_bound(d: &PartiteDecomposition, tp: &TrafficProfile, epsilon: f64) -> Result<BoundReport> {
    require_complete(d)?;
    check_partite_profile(d, tp)?;
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1/2)")));
    }
    let m = d.max_size() as f64;
    let rho = tp.rho_total;
    let lead = (d.k() as f64 - 1.0) * tp.rho_min - 2.0 * epsilon;
    let log10 = log10_or_neg_inf(lead) + m * log10_or_neg_inf(tp.rho_min)
        - m.log10()
        - (m - 1.0) * (1.0 - rho).log10();
    Ok(
        BoundReport::from_log10(BoundKind::Thm3, BoundTarget::MixingTime, log10, Witness::None, rho)
            .with_param("epsilon", epsilon)
            .with_param("exponent", m - 1.0),
    )
}
