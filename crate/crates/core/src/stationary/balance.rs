use nalgebra::{DMatrix, DVector};

use super::product_form::{FixedRates, StationaryDistribution};
use crate::error::{Error, Result};
use crate::topology::StateSpace;

/// Limits for the global-balance solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Largest state space solved by dense LU.
    pub dense_cap: usize,
    /// Largest state space accepted at all (Gauss–Seidel above `dense_cap`).
    pub cap: usize,
    /// Iterative path: stop once the largest update falls below this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            dense_cap: 2_000,
            cap: 20_000,
            tolerance: 1e-15,
            max_sweeps: 200_000,
        }
    }
}

/// Solves `πQ = 0`, `Σπ = 1` on the explicitly assembled generator.
///
/// This is an independent route to the stationary law: it never uses the
/// product form, only the transition rates `q(u, u + e_i) = ν_i` and
/// `q(u + e_i, u) = μ_i`.
pub fn exact_stationary_solve(ss: &StateSpace, rates: &FixedRates) -> Result<StationaryDistribution> {
    exact_stationary_solve_with(ss, rates, SolveOptions::default())
}

pub fn exact_stationary_solve_with(
    ss: &StateSpace,
    rates: &FixedRates,
    opts: SolveOptions,
) -> Result<StationaryDistribution> {
    let n = ss.len();
    if n > opts.cap {
        return Err(Error::Resource {
            what: "balance-equation solve",
            estimate: n,
            cap: opts.cap,
        });
    }
    let pi = if n <= opts.dense_cap {
        dense(ss, rates)?
    } else {
        gauss_seidel(ss, rates, opts)?
    };
    let residual = balance_residual(ss, rates, &pi);
    if !(residual < 1e-9) {
        return Err(Error::Solver(format!("balance residual {residual:e} too large")));
    }
    // π(∅) = 1 / Z.
    let log_z = -pi[ss.empty_index()].ln();
    Ok(StationaryDistribution::from_pi(ss, pi, log_z))
}

fn dense(ss: &StateSpace, rates: &FixedRates) -> Result<Vec<f64>> {
    let n = ss.len();
    // Row j of Qᵀ holds the inflow into j; the last row is replaced by Σπ = 1.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for from in 0..n {
        for m in ss.moves(from) {
            let q = rates.rate(m);
            a[(m.to, from)] += q;
            a[(from, from)] -= q;
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Solver("generator system is singular".into()))?;
    Ok(x.iter().copied().collect())
}

fn gauss_seidel(ss: &StateSpace, rates: &FixedRates, opts: SolveOptions) -> Result<Vec<f64>> {
    let n = ss.len();
    let out_rate: Vec<f64> = (0..n).map(|u| ss.moves(u).map(|m| rates.rate(m)).sum()).collect();
    // Reversed moves give the in-neighbours: the rate from `m.to` back into `u`
    // is the rate of the opposite move on the same node.
    let inflow: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|u| {
            ss.moves(u)
                .map(|m| {
                    let back = crate::topology::Move { node: m.node, to: u, activation: !m.activation };
                    (m.to, rates.rate(back))
                })
                .collect()
        })
        .collect();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..opts.max_sweeps {
        let mut delta: f64 = 0.0;
        for u in 0..n {
            let new: f64 = inflow[u].iter().map(|&(v, q)| pi[v] * q).sum::<f64>() / out_rate[u];
            delta = delta.max((new - pi[u]).abs());
            pi[u] = new;
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if delta / total < opts.tolerance {
            return Ok(pi);
        }
    }
    Err(Error::Solver(format!(
        "Gauss–Seidel did not converge in {} sweeps",
        opts.max_sweeps
    )))
}

/// Largest `|(πQ)_j|` relative to the largest probability flow.
pub fn balance_residual(ss: &StateSpace, rates: &FixedRates, pi: &[f64]) -> f64 {
    let n = ss.len();
    let mut net = vec![0.0; n];
    let mut scale: f64 = 0.0;
    for (u, &p) in pi.iter().enumerate() {
        for m in ss.moves(u) {
            let f = p * rates.rate(m);
            net[m.to] += f;
            net[u] -= f;
            scale = scale.max(f);
        }
    }
    net.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::product_form;
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    #[test]
    fn single_node_sigma_two() {
        let g = build_topology(&TopologySpec::Explicit { n: 1, edges: vec![], labels: None }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let d = exact_stationary_solve(&ss, &FixedRates::uniform(1, 2.0).unwrap()).unwrap();
        assert!((d.pi[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn four_cycle_sigma_three() {
        let g = build_topology(&TopologySpec::Grid { rows: 2, cols: 2, wrap: false }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let d = exact_stationary_solve(&ss, &FixedRates::uniform(4, 3.0).unwrap()).unwrap();
        assert!((d.pi[0] - 1.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn iterative_path_agrees_with_dense() {
        let g = build_topology(&TopologySpec::Grid { rows: 3, cols: 3, wrap: false }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let rates = FixedRates::new(
            (0..9).map(|i| 0.5 + 0.3 * i as f64).collect(),
            (0..9).map(|i| 1.0 + 0.1 * i as f64).collect(),
        )
        .unwrap();
        let opts = SolveOptions { dense_cap: 0, ..SolveOptions::default() };
        let it = exact_stationary_solve_with(&ss, &rates, opts).unwrap();
        let pf = product_form(&ss, &rates).unwrap();
        let err = it.pi.iter().zip(&pf.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "sup error {err}");
    }

    #[test]
    fn cap_is_enforced() {
        let g = build_topology(&TopologySpec::Line { n: 6 }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let opts = SolveOptions { cap: 5, ..SolveOptions::default() };
        assert!(matches!(
            exact_stationary_solve_with(&ss, &FixedRates::uniform(6, 1.0).unwrap(), opts),
            Err(Error::Resource { .. })
        ));
    }
}
