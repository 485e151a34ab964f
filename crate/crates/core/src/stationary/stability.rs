use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::product_form::StationaryDistribution;
use crate::error::{Error, Result};
use crate::topology::StateSpace;

/// Outcome of comparing loads with a capacity notion.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Smallest margin over nodes; positive iff `stable`.
    pub margin: f64,
    /// Per-node margins `θ_i − ρ_i` (empty for the interior check).
    pub margins: Vec<f64>,
    /// Node attaining the smallest margin, if any.
    pub critical_node: Option<usize>,
}

fn check_loads(loads: &[f64], n: usize) -> Result<()> {
    if loads.len() != n {
        return Err(Error::Domain(format!("{} loads for {n} nodes", loads.len())));
    }
    if let Some(i) = loads.iter().position(|&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::Domain(format!("ρ_{i} = {} must lie in [0, 1)", loads[i])));
    }
    Ok(())
}

/// Fixed-rate stability: every queue is stable iff `ρ_i < θ_i` for all `i`.
pub fn stability_check(dist: &StationaryDistribution, loads: &[f64]) -> Result<StabilityVerdict> {
    check_loads(loads, dist.theta.len())?;
    let margins: Vec<f64> = dist.theta.iter().zip(loads).map(|(t, r)| t - r).collect();
    let (critical, margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((None, f64::INFINITY), |(bi, bm), (i, m)| {
            if m < bm {
                (Some(i), m)
            } else {
                (bi, bm)
            }
        });
    Ok(StabilityVerdict {
        stable: margins.iter().all(|&m| m > 0.0),
        margin,
        margins,
        critical_node: critical,
    })
}

/// Whether `ρ` lies in the interior of the convex hull of `Ω`.
///
/// Solves `max δ` subject to `Σ_u α_u u_i ≥ ρ_i + δ` over probability vectors
/// `α`. Since `Ω` is closed under removing nodes, only maximal independent sets
/// are needed as columns.
pub fn interior_check(ss: &StateSpace, loads: &[f64]) -> Result<StabilityVerdict> {
    check_loads(loads, ss.n_nodes())?;
    let maximal = ss.maximal_states();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let delta = lp.add_var(1.0, (-1.0, 1.0));
    let alpha: Vec<_> = maximal.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(alpha.iter().map(|&a| (a, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    for (i, &rho) in loads.iter().enumerate() {
        let mut row: Vec<_> = maximal
            .iter()
            .zip(&alpha)
            .filter(|(&s, _)| ss.state(s).is_active(i))
            .map(|(_, &a)| (a, 1.0))
            .collect();
        row.push((delta, -1.0));
        lp.add_constraint(row, ComparisonOp::Ge, rho);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Solver(format!("interior LP: {e}")))?;
    let margin = sol.objective();
    Ok(StabilityVerdict {
        stable: margin > 1e-12,
        margin,
        margins: Vec::new(),
        critical_node: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{product_form, FixedRates};
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    fn k55() -> StateSpace {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![5, 5] }).unwrap();
        enumerate_state_space(&g).unwrap()
    }

    #[test]
    fn k55_threshold() {
        let ss = k55();
        let d = product_form(&ss, &FixedRates::uniform(10, 1.0).unwrap()).unwrap();
        assert!(stability_check(&d, &[0.24; 10]).unwrap().stable);
        let v = stability_check(&d, &[0.26; 10]).unwrap();
        assert!(!v.stable);
        assert!((v.margin - (16.0 / 63.0 - 0.26)).abs() < 1e-14);
        assert!(stability_check(&d, &[0.0; 10]).unwrap().stable);
    }

    #[test]
    fn interior_examples() {
        let g = build_topology(&TopologySpec::Explicit { n: 1, edges: vec![], labels: None }).unwrap();
        let one = enumerate_state_space(&g).unwrap();
        let v = interior_check(&one, &[0.5]).unwrap();
        assert!(v.stable);
        assert!((v.margin - 0.5).abs() < 1e-9);

        let ss = k55();
        let v = interior_check(&ss, &[0.49; 10]).unwrap();
        assert!(v.stable);
        assert!((v.margin - 0.01).abs() < 1e-9);
        assert!(!interior_check(&ss, &[0.51; 10]).unwrap().stable);
    }

    #[test]
    fn loads_out_of_range() {
        let ss = k55();
        assert!(interior_check(&ss, &[1.0; 10]).is_err());
        assert!(interior_check(&ss, &[0.1; 3]).is_err());
    }
}
