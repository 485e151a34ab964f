//! Clique-based lower bounds for queue-based and arbitrary strategies.

use super::rates::{RateFamily, Shape};
use super::report::{BoundKind, BoundReport, BoundTarget, Witness};
use super::traffic::TrafficProfile;
use crate::error::{Error, Result};
use crate::topology::PartiteDecomposition;

fn clique_load(tp: &TrafficProfile, clique: &[usize]) -> Result<f64> {
    if clique.is_empty() {
        return Err(Error::Domain("empty clique".into()));
    }
    if let Some(&i) = clique.iter().find(|&&i| i >= tp.n_nodes()) {
        return Err(Error::Domain(format!("clique node {i} out of range")));
    }
    let rho_c = tp.rho_of(clique);
    if rho_c >= 1.0 {
        return Err(Error::InfeasibleLoad { rho_clique: rho_c });
    }
    Ok(rho_c)
}

/// `λ_C Σ_{i∈C} λ_i/μ_i² / (1 − ρ_C)`, the queueing term shared by the
/// single-server bound and the decomposition identity.
pub fn clique_queueing_term(tp: &TrafficProfile, clique: &[usize]) -> Result<f64> {
    let rho_c = clique_load(tp, clique)?;
    let second: f64 = clique.iter().map(|&i| tp.lambda[i] / (tp.mu[i] * tp.mu[i])).sum();
    Ok(tp.lambda_of(clique) * second / (1.0 - rho_c))
}

/// Single-server bound `λ_C Σ λ_i/μ_i² / (1 − ρ_C) + ρ_C` on `Σ_{i∈C} E[L_i]`.
pub fn clique_load_bound(tp: &TrafficProfile, clique: &[usize]) -> Result<BoundReport> {
    let rho_c = clique_load(tp, clique)?;
    let value = clique_queueing_term(tp, clique)? + rho_c;
    Ok(
        BoundReport::from_value(BoundKind::Eq2, BoundTarget::AggregateQueue, value, Witness::Clique(clique.to_vec()), rho_c)
            .with_param("rho_clique", rho_c)
            .with_arrivals(tp.lambda_of(clique)),
    )
}

/// `ρ_i / (1 − ρ_C)`: the least ratio `E[f_i(L_{i,C})] / E[g_i(L_i)]` a stable
/// system can have; for fixed rates, a lower bound on `σ_i`.
pub fn activity_factor_requirement(tp: &TrafficProfile, clique: &[usize], node: usize) -> Result<f64> {
    if !clique.contains(&node) {
        return Err(Error::Domain(format!("node {node} is not in the clique")));
    }
    let rho_c = clique_load(tp, clique)?;
    Ok(tp.rho[node] / (1.0 - rho_c))
}

fn check_xi(xi: &[f64], tp: &TrafficProfile) -> Result<()> {
    if xi.len() != tp.n_nodes() {
        return Err(Error::Domain(format!("{} ξ values for {} nodes", xi.len(), tp.n_nodes())));
    }
    if xi.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("ξ must be positive".into()));
    }
    Ok(())
}

/// Concave increasing `f` shared on the clique, `g_i ≥ ξ_i`:
/// `λ_C Σ λ_i/μ_i²/(1−ρ_C) + |C| f⁻¹((1/|C|) Σ ρ_i ξ_i /(1−ρ_C)) + ρ_C`.
pub fn thm1_concave_f(
    tp: &TrafficProfile,
    clique: &[usize],
    family: &RateFamily,
    xi: &[f64],
) -> Result<BoundReport> {
    check_xi(xi, tp)?;
    family.check_shape(Shape::IncreasingConcaveF)?;
    let rho_c = clique_load(tp, clique)?;
    let size = clique.len() as f64;
    let weighted: f64 = clique.iter().map(|&i| tp.rho[i] * xi[i]).sum();
    let arg = weighted / (size * (1.0 - rho_c));
    let inv = family.f_inverse(arg)?;
    let value = clique_queueing_term(tp, clique)? + size * inv + rho_c;
    Ok(
        BoundReport::from_value(BoundKind::Thm1i, BoundTarget::AggregateQueue, value, Witness::Clique(clique.to_vec()), rho_c)
            .with_param("rho_clique", rho_c)
            .with_param("f_inverse_argument", arg)
            .with_arrivals(tp.lambda_of(clique)),
    )
}

/// Convex decreasing `g` shared on the clique, `f_i ≤ ξ_i`:
/// `Σ ρ_i E[L_i] ≥ ρ_C g⁻¹((1−ρ_C) Σ ξ_i / ρ_C)`. An argument above `g(0)`
/// makes the bound vacuous.
pub fn thm1_convex_g(
    tp: &TrafficProfile,
    clique: &[usize],
    family: &RateFamily,
    xi: &[f64],
) -> Result<BoundReport> {
    check_xi(xi, tp)?;
    family.check_shape(Shape::DecreasingConvexG)?;
    let rho_c = clique_load(tp, clique)?;
    let witness = Witness::Clique(clique.to_vec());
    let xi_sum: f64 = clique.iter().map(|&i| xi[i]).sum();
    if rho_c == 0.0 {
        return Ok(BoundReport::from_value(BoundKind::Thm1ii, BoundTarget::WeightedQueue, 0.0, witness, 0.0));
    }
    let arg = (1.0 - rho_c) * xi_sum / rho_c;
    let value = if arg >= family.g(0.0) {
        0.0
    } else {
        rho_c * family.g_inverse(arg)?
    };
    Ok(BoundReport::from_value(BoundKind::Thm1ii, BoundTarget::WeightedQueue, value, witness, rho_c)
        .with_param("rho_clique", rho_c)
        .with_param("g_inverse_argument", arg))
}

/// Concave increasing `f` and convex decreasing `g`, both shared:
/// `Σ_{i∈C} E[L_i] ≥ h⁻¹(ρ_C / (|C| (1 − ρ_C)))`.
pub fn thm1_h_bound(tp: &TrafficProfile, clique: &[usize], family: &RateFamily) -> Result<BoundReport> {
    family.check_shape(Shape::IncreasingConcaveF)?;
    family.check_shape(Shape::DecreasingConvexG)?;
    let rho_c = clique_load(tp, clique)?;
    let arg = rho_c / (clique.len() as f64 * (1.0 - rho_c));
    let value = family.h_inverse(arg)?;
    Ok(
        BoundReport::from_value(BoundKind::Thm1iii, BoundTarget::AggregateQueue, value, Witness::Clique(clique.to_vec()), rho_c)
            .with_param("rho_clique", rho_c)
            .with_param("h_inverse_argument", arg)
            .with_arrivals(tp.lambda_of(clique)),
    )
}

/// Sums per-clique reports over node-disjoint cliques, giving a bound on the
/// total queue of the covered nodes.
pub fn sum_over_cover(reports: &[BoundReport]) -> Result<BoundReport> {
    let first = reports.first().ok_or_else(|| Error::Domain("empty clique cover".into()))?;
    let mut cliques = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in reports {
        if r.kind != first.kind || r.target != first.target {
            return Err(Error::Domain("cover mixes bound kinds".into()));
        }
        let Witness::Clique(c) = &r.witness else {
            return Err(Error::Domain("cover entries must be clique bounds".into()));
        };
        for &i in c {
            if !seen.insert(i) {
                return Err(Error::Domain(format!("node {i} appears in two cover cliques")));
            }
        }
        cliques.push(c.clone());
    }
    let value: f64 = reports.iter().map(|r| r.value).sum();
    let rho = reports.iter().map(|r| r.rho).fold(0.0, f64::max);
    let mut out = BoundReport::from_value(first.kind, first.target, value, Witness::CliqueCover(cliques), rho);
    out.parameters.push(("cliques".into(), reports.len() as f64));
    let lambda: Option<f64> = reports.iter().map(|r| r.param("arrival_rate")).sum();
    if let Some(lambda) = lambda {
        out = out.with_arrivals(lambda);
    }
    Ok(out)
}

/// Node-disjoint transversal cliques `{V_1[j], ..., V_K[j]}` of a complete
/// partite graph, `j < min_k M_k`.
pub fn transversal_clique_cover(d: &PartiteDecomposition) -> Result<Vec<Vec<usize>>> {
    if !d.is_complete() {
        return Err(Error::WrongTopology("transversal cover needs a complete partite graph".into()));
    }
    let m = d.sizes().into_iter().min().unwrap_or(0);
    Ok((0..m)
        .map(|j| d.components().iter().map(|c| c[j]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(rho: Vec<f64>) -> TrafficProfile {
        TrafficProfile::from_loads(rho).unwrap()
    }

    #[test]
    fn eq2_examples() {
        let r = clique_load_bound(&tp(vec![0.25, 0.25]), &[0, 1]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(clique_load_bound(&tp(vec![0.0, 0.0]), &[0, 1]).unwrap().value, 0.0);
        let r = clique_load_bound(&tp(vec![0.7]), &[0]).unwrap();
        assert!((r.value - 0.7 / 0.3).abs() < 1e-12);
        assert!((r.delay_equivalent.unwrap() - 1.0 / 0.3).abs() < 1e-12);
        assert!(matches!(
            clique_load_bound(&tp(vec![0.5, 0.5]), &[0, 1]),
            Err(Error::InfeasibleLoad { .. })
        ));
    }

    #[test]
    fn lemma1_requirement() {
        let t = tp(vec![0.45, 0.45]);
        assert!((activity_factor_requirement(&t, &[0, 1], 0).unwrap() - 4.5).abs() < 1e-12);
        let t = tp(vec![0.0, 0.45]);
        assert_eq!(activity_factor_requirement(&t, &[0, 1], 0).unwrap(), 0.0);
    }

    #[test]
    fn thm1_linear_family() {
        let lin = RateFamily::Polynomial { a: 1.0, c: 1.0 };
        let t = tp(vec![0.25, 0.25]);
        let r = thm1_concave_f(&t, &[0, 1], &lin, &[1.0, 1.0]).unwrap();
        // 0.5 + 2 · (0.5 / (2 · 0.5)) + 0.5
        assert!((r.value - 2.0).abs() < 1e-12);
        let h = thm1_h_bound(&t, &[0, 1], &lin).unwrap();
        assert!((h.value - 0.5).abs() < 1e-15);
        let zero = thm1_concave_f(&tp(vec![0.0, 0.0]), &[0, 1], &lin, &[1.0, 1.0]).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn thm1_loglog() {
        let fam = RateFamily::LogLog;
        let e = std::f64::consts::E;
        let r = thm1_convex_g(&tp(vec![0.4, 0.4]), &[0, 1], &fam, &[1.0, 1.0]).unwrap();
        assert!((r.value - 0.8 * (e - 1.0)).abs() < 1e-10);
        let r = thm1_convex_g(&tp(vec![0.45, 0.45]), &[0, 1], &fam, &[1.0, 1.0]).unwrap();
        assert!((r.value - 0.9 * fam.g_inverse(2.0 / 9.0).unwrap()).abs() < 1e-12);
        let v = thm1_convex_g(&tp(vec![0.05, 0.05]), &[0, 1], &fam, &[1.0, 1.0]).unwrap();
        assert!(v.vacuous);
        let h = thm1_h_bound(&tp(vec![0.3, 0.3]), &[0, 1], &fam).unwrap();
        assert!((h.value - ((0.6f64 / (2.0 * 0.4)).exp() - 1.0)).abs() < 1e-12);
        let lo = thm1_concave_f(&tp(vec![0.25, 0.25]), &[0, 1], &fam, &[1.0, 1.0]).unwrap();
        let hi = thm1_concave_f(&tp(vec![0.3, 0.3]), &[0, 1], &fam, &[1.0, 1.0]).unwrap();
        assert!(lo.value > 0.0 && hi.value > lo.value);
    }

    #[test]
    fn convex_f_is_rejected() {
        let sq = RateFamily::Polynomial { a: 2.0, c: 1.0 };
        assert!(matches!(
            thm1_concave_f(&tp(vec![0.2, 0.2]), &[0, 1], &sq, &[1.0, 1.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn cover_sum() {
        let t = tp(vec![0.25; 4]);
        let reps: Vec<_> = [[0, 1], [2, 3]]
            .iter()
            .map(|c| clique_load_bound(&t, c).unwrap())
            .collect();
        let s = sum_over_cover(&reps).unwrap();
        assert!((s.value - 2.0).abs() < 1e-15);
        assert!((s.delay_equivalent.unwrap() - 2.0).abs() < 1e-15);
        let dup = vec![reps[0].clone(), reps[0].clone()];
        assert!(sum_over_cover(&dup).is_err());
    }
}
