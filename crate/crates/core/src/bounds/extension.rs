//! Bounds for general partite graphs satisfying the `H ≤ 1` assumption, and
//! numerical checks of the inequalities they rest on.

use super::paths::{partite_sets, PathStructure};
use super::report::{BoundKind, BoundReport, BoundTarget, Witness};
use super::traffic::TrafficProfile;
use crate::error::{Error, Result};
use crate::stationary::{subset_analysis, FixedRates, StationaryDistribution};
use crate::topology::{PartiteDecomposition, StateSet, StateSpace, StructuralCoefficients};

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// `ρ_γ = 1 − γ ζ ρ_min²`.
pub fn rho_gamma(zeta: f64, gamma: f64, rho_min: f64) -> f64 {
    1.0 - gamma * zeta * rho_min * rho_min
}

/// Smallest `γ` with `ρ ≥ ρ_γ`.
pub fn min_admissible_gamma(zeta: f64, tp: &TrafficProfile) -> f64 {
    (1.0 - tp.rho_total) / (zeta * tp.rho_min * tp.rho_min)
}

fn check_gamma(tp: &TrafficProfile, zeta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("γ = {gamma} must be positive")));
    }
    if !(tp.rho_total < 1.0) {
        return Err(Error::InfeasibleLoad { rho_clique: tp.rho_total });
    }
    let required = rho_gamma(zeta, gamma, tp.rho_min);
    if tp.rho_total < required {
        return Err(Error::Precondition { rho: tp.rho_total, required });
    }
    Ok(required)
}

fn lg(x: f64) -> f64 {
    if x > 0.0 {
        x.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// `Σ_{i∈S} w_i E[L_i] > δ(S)(1−4γ) ρ_min^{M+3} / 2^{N+1} · (1/(1−ρ))^{M(1−H*(S))}`.
pub fn thm4_bound(
    ps: &PathStructure,
    d: &PartiteDecomposition,
    tp: &TrafficProfile,
    zeta: f64,
    gamma: f64,
) -> Result<BoundReport> {
    let required = check_gamma(tp, zeta, gamma)?;
    let (n, m) = (d.n_nodes() as f64, d.max_size() as f64);
    let exponent = m * (1.0 - ps.h_star);
    let log10 = lg(ps.delta) + lg(1.0 - 4.0 * gamma) + (m + 3.0) * lg(tp.rho_min)
        - (n + 1.0) * LOG10_2
        - exponent * (1.0 - tp.rho_total).log10();
    Ok(BoundReport::from_log10(
        BoundKind::Thm4,
        BoundTarget::WeightedQueue,
        log10,
        Witness::NodeSet { component: ps.k, nodes: ps.nodes.clone() },
        tp.rho_total,
    )
    .with_param("gamma", gamma)
    .with_param("rho_gamma", required)
    .with_param("zeta", zeta)
    .with_param("delta", ps.delta)
    .with_param("h_star", ps.h_star)
    .with_param("exponent", exponent))
}

/// `t_mix(ε) > ((1−γ)ρ_min − 2ε)(1−4γ) ρ_min^{M+2} / 2^N · (1/(1−ρ))^{M(1−H*_min)}`.
pub fn thm5_bound(
    h_star_min: f64,
    d: &PartiteDecomposition,
    tp: &TrafficProfile,
    zeta: f64,
    gamma: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1/2)")));
    }
    let required = check_gamma(tp, zeta, gamma)?;
    let (n, m) = (d.n_nodes() as f64, d.max_size() as f64);
    let exponent = m * (1.0 - h_star_min);
    let lead = (1.0 - gamma) * tp.rho_min - 2.0 * epsilon;
    let log10 = lg(lead) + lg(1.0 - 4.0 * gamma) + (m + 2.0) * lg(tp.rho_min)
        - n * LOG10_2
        - exponent * (1.0 - tp.rho_total).log10();
    Ok(
        BoundReport::from_log10(BoundKind::Thm5, BoundTarget::MixingTime, log10, Witness::None, tp.rho_total)
            .with_param("gamma", gamma)
            .with_param("rho_gamma", required)
            .with_param("zeta", zeta)
            .with_param("epsilon", epsilon)
            .with_param("h_star_min", h_star_min)
            .with_param("exponent", exponent),
    )
}

/// One inequality evaluated on an exact distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: String,
    pub lhs: f64,
    /// `"<"` or `">="`.
    pub relation: &'static str,
    pub rhs: f64,
    pub holds: bool,
}

impl LemmaCheck {
    fn less(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, relation: "<", rhs, holds: lhs < rhs }
    }

    fn at_least(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, relation: ">=", rhs, holds: lhs >= rhs }
    }

    /// `rhs − lhs` for `<`, `lhs − rhs` for `>=`.
    pub fn margin(&self) -> f64 {
        if self.relation == "<" {
            self.rhs - self.lhs
        } else {
            self.lhs - self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaDiagnostics {
    pub checks: Vec<LemmaCheck>,
    /// Groups not evaluated, with the reason.
    pub skipped: Vec<String>,
}

impl LemmaDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn has_group(&self, prefix: &str) -> bool {
        self.checks.iter().any(|c| c.name.starts_with(prefix))
    }
}

/// Evaluates the structural lemmas on the exact stationary law.
///
/// Groups: `lemma2` (complete partite sandwiches of `Q(B_k)`, `π(B_k)`),
/// `lemma3` (little mass off Ω*), `lemma4` (balanced `Π σ / ρ̂` ratios),
/// `lemma5` (boundary weights) and `lemma6` (sandwiches for the path sets
/// `S_l(S)` with `S = {first node of V_k}`, `w ≡ 1`). Unstable
/// configurations are skipped entirely; groups needing `ρ ≥ ρ_γ` or equal
/// rates within components are skipped when those fail.
pub fn lemma_diagnostics(
    ss: &StateSpace,
    dist: &StationaryDistribution,
    rates: &FixedRates,
    d: &PartiteDecomposition,
    structure: &StructuralCoefficients,
    tp: &TrafficProfile,
    gamma: f64,
) -> Result<LemmaDiagnostics> {
    let mut out = LemmaDiagnostics::default();
    if tp.rho_hat.len() != d.k() {
        return Err(Error::Domain("traffic profile carries no component loads".into()));
    }
    if let Some(i) = (0..tp.n_nodes()).find(|&i| !(tp.rho[i] < dist.theta[i])) {
        out.skipped.push(format!(
            "unstable: ρ_{i} = {} ≥ θ_{i} = {}; lemma preconditions unmet",
            tp.rho[i], dist.theta[i]
        ));
        return Ok(out);
    }
    let kk = d.k();
    let rho = tp.rho_total;
    let zeta = structure.zeta;
    let sigma = rates.sigma();

    if d.is_complete() {
        let n_bar: f64 = (0..kk).map(|k| tp.rho_hat[k]).sum();
        for k in 0..kk {
            let mask = d.component_mask(k);
            let bk = StateSet::from_predicate(ss, |u| u.0 & mask != 0);
            let a = subset_analysis(ss, dist, rates, &bk)?;
            let others = n_bar - tp.rho_hat[k];
            let mk = d.size(k) as f64;
            let q_rhs = mk * (1.0 - others) * ((1.0 - rho) / tp.rho_hat[k]).powf(mk - 1.0);
            out.checks.push(LemmaCheck::less(format!("lemma2.Q(B{})", k + 1), a.flow, q_rhs));
            out.checks.push(LemmaCheck::less(format!("lemma2.pi(B{})>", k + 1), tp.rho_hat[k], a.pi_mass));
            out.checks.push(LemmaCheck::less(format!("lemma2.pi(B{})<", k + 1), a.pi_mass, 1.0 - others));
            let comp = 1.0 - a.pi_mass;
            out.checks.push(LemmaCheck::less(format!("lemma2.pi(not B{})>", k + 1), others, comp));
            out.checks.push(LemmaCheck::less(format!("lemma2.pi(not B{})<", k + 1), comp, 1.0 - tp.rho_hat[k]));
        }
    }

    let off_star: f64 = (0..ss.len())
        .filter(|&u| !structure.is_dominant(u))
        .map(|u| dist.pi[u])
        .sum();
    out.checks.push(LemmaCheck::less("lemma3.off_star", off_star, (1.0 - rho) / zeta));
    for k in 0..kk {
        let pv = dist.pi[structure.omega_star[k]];
        out.checks.push(LemmaCheck::less(
            format!("lemma3.pi(v{})", k + 1),
            tp.rho_hat[k] - (1.0 - rho) / zeta,
            pv,
        ));
    }

    let required = rho_gamma(zeta, gamma, tp.rho_min);
    if rho < required {
        out.skipped.push(format!("lemma4-6: ρ = {rho} below ρ_γ = {required}"));
        return Ok(out);
    }
    // ln R_k = Σ_{i∈V_k} ln σ_i − ln ρ̂_k
    let ln_r: Vec<f64> = (0..kk)
        .map(|k| d.component(k).iter().map(|&i| sigma[i].ln()).sum::<f64>() - tp.rho_hat[k].ln())
        .collect();
    let ln_min = ln_r.iter().cloned().fold(f64::INFINITY, f64::min);
    let ln_max = ln_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if 1.0 - 3.0 * gamma > 0.0 {
        out.checks.push(LemmaCheck::at_least(
            "lemma4.ln_ratio",
            ln_min,
            (1.0 - 3.0 * gamma).ln() + ln_max,
        ));
    } else {
        out.skipped.push(format!("lemma4-6: 1 − 3γ ≤ 0 at γ = {gamma}"));
        return Ok(out);
    }

    let equal_within = (0..kk).all(|k| {
        let c = d.component(k);
        c.iter().all(|&i| (sigma[i] / sigma[c[0]] - 1.0).abs() < 1e-12)
    });
    if !equal_within {
        out.skipped.push("lemma5-6: activation rates differ within a component".into());
        return Ok(out);
    }
    // ln σ̂_k^{M_k}
    let ln_pow: Vec<f64> = (0..kk)
        .map(|k| d.size(k) as f64 * sigma[d.component(k)[0]].ln())
        .collect();
    let k_star = (0..kk)
        .min_by(|&a, &b| ln_pow[a].total_cmp(&ln_pow[b]))
        .expect("at least one component");
    let ln_sigma_star = ln_pow[k_star];
    let ln_base = ln_sigma_star - ((1.0 - 3.0 * gamma) * tp.rho_min).ln();
    let n = d.n_nodes() as f64;
    let m = d.max_size() as f64;
    let weights = vec![1.0; tp.n_nodes()];
    for k in 0..kk {
        let s = [d.component(k)[0]];
        let ps = partite_sets(ss, d, tp, &weights, &s)?;
        for l in 0..kk {
            let tag = format!("S=V{}[0],l={}", k + 1, l + 1);
            let ln_max_weight = ps.boundaries[l]
                .iter()
                .map(|&u| ss.state(u).active_nodes().map(|i| sigma[i].ln()).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            out.checks.push(LemmaCheck::less(
                format!("lemma5.ln_boundary_weight[{tag}]"),
                ln_max_weight,
                ps.h[l] * ln_base + 1e-12 * ln_base.abs().max(1.0),
            ));
            let a = subset_analysis(ss, dist, rates, &ps.sets[l])?;
            let ln_q_rhs = n * std::f64::consts::LN_2 - ((1.0 - 3.0 * gamma) * tp.rho_min).ln()
                + m * (ps.h[l] - 1.0) * (tp.rho_hat[k_star] / (1.0 - rho)).ln();
            out.checks.push(LemmaCheck::less(format!("lemma6.ln_Q[{tag}]"), a.flow.ln(), ln_q_rhs));
            let lo = (1.0 - gamma) * tp.rho_min;
            out.checks.push(LemmaCheck::less(format!("lemma6.pi>[{tag}]"), lo, a.pi_mass));
            out.checks.push(LemmaCheck::less(format!("lemma6.pi<[{tag}]"), a.pi_mass, 1.0 - lo));
            out.checks.push(LemmaCheck::less(format!("lemma6.pi_c>[{tag}]"), lo, 1.0 - a.pi_mass));
            out.checks.push(LemmaCheck::less(format!("lemma6.pi_c<[{tag}]"), 1.0 - a.pi_mass, 1.0 - lo));
        }
    }
    Ok(out)
}
