//! Exact analyses and bounds for one scenario.

use csma_core::bounds::{
    clique_load_bound, h_star_min, min_admissible_gamma, partite_sets, prop1_bound,
    prop2_bound, sum_over_cover, thm1_concave_f, thm1_convex_g, thm1_h_bound, thm2_bound, thm2_symmetric,
    thm3_bound, thm4_bound, thm5_bound, transversal_clique_cover, BoundReport, TrafficProfile,
};
use csma_core::stationary::{
    mixing_time_with, product_form, stability_check, subset_analysis, MixingOptions, MixingProfile,
    StationaryDistribution, SubsetAnalysis,
};
use csma_core::topology::{compute_zeta, enumerate_cliques, InterferenceGraph, PartiteDecomposition};
use csma_core::Error;

use crate::config::BoundSelection;
use crate::results::ResultRow;
use crate::scenario::Scenario;
use crate::{CliError, Result};

/// Bound reports at one load, each with an optional tag (strategy or clique).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSet {
    pub rho: f64,
    pub reports: Vec<(Option<String>, BoundReport)>,
    /// Bounds that were skipped and why.
    pub notes: Vec<String>,
}

/// Node-disjoint cliques: the transversal cliques of a complete partite
/// graph, otherwise a greedy pick of maximal cliques, largest first.
pub fn clique_cover(g: &InterferenceGraph, d: Option<&PartiteDecomposition>) -> Vec<Vec<usize>> {
    if let Some(d) = d.filter(|d| d.is_complete()) {
        if let Ok(c) = transversal_clique_cover(d) {
            return c;
        }
    }
    let mut cliques = enumerate_cliques(g, None);
    cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut used = 0u64;
    let mut out = Vec::new();
    for c in cliques {
        let mask = c.iter().fold(0u64, |m, &i| m | 1 << i);
        if mask & used == 0 {
            used |= mask;
            out.push(c);
        }
    }
    out.sort();
    out
}

struct Collector<'a> {
    scn: &'a Scenario,
    set: BoundSet,
}

impl Collector<'_> {
    /// Keeps a report, or records why the bound does not apply. Resource
    /// errors abort; an explicitly requested bound on the wrong topology is
    /// a validation error.
    fn keep(&mut self, kind: BoundSelection, tag: Option<String>, r: csma_core::Result<BoundReport>) -> Result<()> {
        match r {
            Ok(r) => self.set.reports.push((tag, r)),
            Err(e @ Error::Resource { .. }) => return Err(e.into()),
            Err(Error::WrongTopology(m)) if self.scn.config.bounds.kinds.is_some() => {
                return Err(CliError::Validation(format!("{kind:?} requested but {m}")));
            }
            Err(e) => {
                let mut note = format!("{kind:?}");
                if let Some(t) = &tag {
                    note.push_str(&format!("[{t}]"));
                }
                self.set.notes.push(format!("ρ = {}: {note} skipped: {e}", self.set.rho));
            }
        }
        Ok(())
    }

    fn cover(&mut self, kind: BoundSelection, cover: &[Vec<usize>], f: impl Fn(&[usize]) -> csma_core::Result<BoundReport>) -> Result<()> {
        let mut parts = Vec::new();
        for (j, c) in cover.iter().enumerate() {
            match f(c) {
                Ok(r) => {
                    parts.push(r.clone());
                    self.keep(kind, Some(format!("c{j}")), Ok(r))?;
                }
                Err(e) => return self.keep(kind, Some(format!("c{j}")), Err(e)),
            }
        }
        if cover.len() > 1 {
            self.keep(kind, Some("cover".into()), sum_over_cover(&parts))?;
        }
        Ok(())
    }
}

pub fn bounds_at(scn: &Scenario, rho: f64) -> Result<BoundSet> {
    let cfg = &scn.config.bounds;
    let tp = scn.traffic(rho)?;
    let nodes = scn.bound_nodes();
    let weights = scn.weights();
    let xi = scn.xi();
    let mut c = Collector { scn, set: BoundSet { rho, reports: Vec::new(), notes: Vec::new() } };
    let d = scn.decomposition.as_ref();
    let cover = clique_cover(&scn.graph, d);

    if cfg.wants(BoundSelection::Eq2) {
        c.cover(BoundSelection::Eq2, &cover, |q| clique_load_bound(&tp, q))?;
    }
    if let Some(family) = &cfg.family {
        if cfg.wants(BoundSelection::Thm1i) {
            c.cover(BoundSelection::Thm1i, &cover, |q| thm1_concave_f(&tp, q, family, &xi))?;
        }
        if cfg.wants(BoundSelection::Thm1ii) {
            c.cover(BoundSelection::Thm1ii, &cover, |q| thm1_convex_g(&tp, q, family, &xi))?;
        }
        if cfg.wants(BoundSelection::Thm1iii) {
            c.cover(BoundSelection::Thm1iii, &cover, |q| thm1_h_bound(&tp, q, family))?;
        }
    }

    let needs_space = [BoundSelection::Prop1, BoundSelection::Prop2, BoundSelection::Thm4, BoundSelection::Thm5]
        .into_iter()
        .any(|k| cfg.wants(k));
    let candidates = if needs_space && scn.space.is_some() { Some(scn.candidates(&tp)?) } else { None };
    if let (Some(ss), Some(candidates)) = (scn.space.as_ref(), candidates.as_ref()) {
        for (s, rates) in scn.fixed() {
            let dist = product_form(ss, rates)?;
            if cfg.wants(BoundSelection::Prop1) {
                let r = prop1_bound(ss, &dist, rates, &tp, &weights, &nodes, candidates);
                c.keep(BoundSelection::Prop1, Some(s.name.clone()), r)?;
            }
            if cfg.wants(BoundSelection::Prop2) {
                let r = prop2_bound(ss, &dist, rates, candidates, cfg.epsilon, rho);
                c.keep(BoundSelection::Prop2, Some(s.name.clone()), r)?;
            }
        }
    }

    if let Some(d) = d {
        if cfg.wants(BoundSelection::Thm2) {
            c.keep(BoundSelection::Thm2, None, thm2_bound(d, &tp, &weights, &nodes))?;
            // The per-node form applies only to symmetric loads and sizes.
            if let Ok(r) = thm2_symmetric(d, &tp) {
                c.set.reports.push((Some("symmetric".into()), r));
            }
        }
        if cfg.wants(BoundSelection::Thm3) {
            c.keep(BoundSelection::Thm3, None, thm3_bound(d, &tp, cfg.epsilon))?;
        }
        if let Some(ss) = scn.space.as_ref() {
            let want4 = cfg.wants(BoundSelection::Thm4);
            let want5 = cfg.wants(BoundSelection::Thm5);
            if want4 || want5 {
                match compute_zeta(ss, d) {
                    Ok(structure) => {
                        let zeta = structure.zeta;
                        let gamma = default_gamma(cfg.gamma, zeta, &tp);
                        if want4 {
                            let r = partite_sets(ss, d, &tp, &weights, &nodes)
                                .and_then(|ps| thm4_bound(&ps, d, &tp, zeta, gamma));
                            c.keep(BoundSelection::Thm4, None, r)?;
                        }
                        if want5 {
                            let r = h_star_min(ss, d, &tp, &weights)
                                .and_then(|ps| thm5_bound(ps.h_star, d, &tp, zeta, gamma, cfg.epsilon));
                            c.keep(BoundSelection::Thm5, None, r)?;
                        }
                    }
                    Err(e) => {
                        if want4 {
                            c.keep(BoundSelection::Thm4, None, Err(e.clone()))?;
                        }
                        if want5 {
                            c.keep(BoundSelection::Thm5, None, Err(e))?;
                        }
                    }
                }
            }
        }
    } else {
        for k in [BoundSelection::Thm2, BoundSelection::Thm3, BoundSelection::Thm4, BoundSelection::Thm5] {
            if cfg.wants(k) {
                c.keep(k, None, Err(Error::WrongTopology("the graph has no partite decomposition".into())))?;
            }
        }
    }
    Ok(c.set)
}

/// Configured `γ`, else `max(0.01, 1.0001 γ_min)`.
pub fn default_gamma(configured: Option<f64>, zeta: f64, tp: &TrafficProfile) -> f64 {
    configured.unwrap_or_else(|| (1.0001 * min_admissible_gamma(zeta, tp)).max(0.01))
}

/// Product-form law of each fixed strategy, in strategy order.
pub fn stationary_laws(scn: &Scenario) -> Result<Vec<(String, StationaryDistribution)>> {
    let ss = scn.space()?;
    scn.fixed().map(|(s, r)| Ok((s.name.clone(), product_form(ss, r)?))).collect()
}

/// `θ_i` and `ln Z` rows (load independent) plus stability rows per load.
pub fn stationary_rows(scn: &Scenario, laws: &[(String, StationaryDistribution)]) -> Result<Vec<ResultRow>> {
    let id = &scn.config.scenario;
    let mut rows = Vec::new();
    for (name, dist) in laws {
        for (i, t) in dist.theta.iter().enumerate() {
            rows.push(ResultRow::new(id, None, format!("theta_{i}[{name}]"), *t, name.clone()));
        }
        rows.push(ResultRow::new(id, None, format!("log_z[{name}]"), dist.log_z, name.clone()));
    }
    for &rho in &scn.sweep {
        let tp = scn.traffic(rho)?;
        for (name, dist) in laws {
            let v = stability_check(dist, &tp.rho)?;
            let critical = v.critical_node.map(|i| format!("node {i}")).unwrap_or_default();
            rows.push(ResultRow::new(id, Some(rho), format!("stable[{name}]"), v.stable as u8 as f64, critical.clone()));
            rows.push(ResultRow::new(id, Some(rho), format!("stability_margin[{name}]"), v.margin, critical));
        }
    }
    Ok(rows)
}

/// Flow quantities of the candidate subsets for one fixed strategy. Path-set
/// candidates depend on the load, so their ids carry it.
pub fn subset_rows(scn: &Scenario, name: &str, dist: &StationaryDistribution) -> Result<Vec<(String, SubsetAnalysis)>> {
    let ss = scn.space()?;
    let rates = scn
        .strategies
        .iter()
        .find(|s| s.name == name)
        .and_then(|s| s.rates.as_ref())
        .ok_or_else(|| CliError::Validation(format!("{name} is not a fixed strategy")))?;
    let load_dependent = scn.config.candidates.iter().any(|c| matches!(c, crate::config::CandidateSpec::PathSets));
    let loads: Vec<f64> = if load_dependent { scn.sweep.clone() } else { vec![scn.sweep[0]] };
    let mut out = Vec::new();
    for rho in loads {
        for c in scn.candidates(&scn.traffic(rho)?)? {
            if c.set.is_empty() || c.set.is_full() {
                continue;
            }
            let a = subset_analysis(ss, dist, rates, &c.set)?;
            let id = if load_dependent { format!("{}@rho={rho}", c.label) } else { c.label };
            out.push((id, a));
        }
    }
    Ok(out)
}

/// Exact `t_mix(ε)` for each fixed strategy and configured `ε`.
pub fn mixing_profiles(scn: &Scenario) -> Result<Vec<(String, MixingProfile)>> {
    let ss = scn.space()?;
    let opts = MixingOptions { cap: scn.config.caps.mixing_states, ..MixingOptions::default() };
    let mut out = Vec::new();
    for (s, rates) in scn.fixed() {
        for &eps in &scn.config.mixing.epsilon {
            out.push((s.name.clone(), mixing_time_with(ss, rates, eps, opts)?));
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("mixing needs at least one fixed strategy".into()));
    }
    Ok(out)
}

pub fn mixing_rows(scn: &Scenario, profiles: &[(String, MixingProfile)]) -> Vec<ResultRow> {
    profiles
        .iter()
        .map(|(name, p)| {
            ResultRow::new(&scn.config.scenario, None, format!("t_mix[eps={}][{name}]", p.epsilon), p.t_mix, name.clone())
        })
        .collect()
}
