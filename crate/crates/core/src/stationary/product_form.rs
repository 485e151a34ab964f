use crate::error::{Error, Result};
use crate::topology::{Move, StateSpace};

/// Fixed activation and de-activation rates of the activity process.
///
/// `nu[i]` is the effective activation rate `ν_i φ_i` and `mu_deact[i]` the
/// effective de-activation rate `μ_i ψ_i`; `sigma[i] = nu[i] / mu_deact[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRates {
    sigma: Vec<f64>,
    nu: Vec<f64>,
    mu_deact: Vec<f64>,
}

impl FixedRates {
    pub fn new(nu: Vec<f64>, mu_deact: Vec<f64>) -> Result<Self> {
        if nu.len() != mu_deact.len() {
            return Err(Error::Domain(format!(
                "{} activation rates for {} de-activation rates",
                nu.len(),
                mu_deact.len()
            )));
        }
        for (i, (&a, &b)) in nu.iter().zip(&mu_deact).enumerate() {
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(Error::Domain(format!(
                    "node {i}: rates must be finite and positive (nu = {a}, mu = {b})"
                )));
            }
        }
        let sigma = nu.iter().zip(&mu_deact).map(|(a, b)| a / b).collect();
        Ok(Self { sigma, nu, mu_deact })
    }

    /// Activity factors with unit de-activation rates, so `ν_i = σ_i`.
    pub fn from_sigma(sigma: Vec<f64>) -> Result<Self> {
        let ones = vec![1.0; sigma.len()];
        Self::new(sigma, ones)
    }

    pub fn uniform(n: usize, sigma: f64) -> Result<Self> {
        Self::from_sigma(vec![sigma; n])
    }

    /// Rates from back-off rate `ν`, transmission probability `φ`, service rate
    /// `μ` and release probability `ψ`.
    pub fn from_probabilities(nu: &[f64], phi: &[f64], mu: &[f64], psi: &[f64]) -> Result<Self> {
        let n = nu.len();
        if phi.len() != n || mu.len() != n || psi.len() != n {
            return Err(Error::Domain("parameter vectors differ in length".into()));
        }
        if phi.iter().chain(psi).any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Domain("probabilities must lie in (0, 1]".into()));
        }
        Self::new(
            nu.iter().zip(phi).map(|(a, b)| a * b).collect(),
            mu.iter().zip(psi).map(|(a, b)| a * b).collect(),
        )
    }

    pub fn n_nodes(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn mu_deact(&self) -> &[f64] {
        &self.mu_deact
    }

    /// Rate of a single-node transition of the activity process.
    #[inline]
    pub fn rate(&self, m: Move) -> f64 {
        if m.activation {
            self.nu[m.node]
        } else {
            self.mu_deact[m.node]
        }
    }
}

/// Stationary law of the fixed-rate activity process over a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// `ln Z`; `Z` itself may overflow for heavy-traffic activity factors.
    pub log_z: f64,
    /// Per-node activity fractions `θ_i`.
    pub theta: Vec<f64>,
}

impl StationaryDistribution {
    /// Builds `θ` from a probability vector.
    pub fn from_pi(ss: &StateSpace, pi: Vec<f64>, log_z: f64) -> Self {
        let mut theta = vec![0.0; ss.n_nodes()];
        for (&u, &p) in ss.states().iter().zip(&pi) {
            for i in u.active_nodes() {
                theta[i] += p;
            }
        }
        Self { pi, log_z, theta }
    }

    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// Mass of a set of state ordinals.
    pub fn mass(&self, states: impl IntoIterator<Item = usize>) -> f64 {
        states.into_iter().map(|i| self.pi[i]).sum()
    }
}

/// `π(u) = Z⁻¹ Π σ_i^{u_i}`, evaluated in the log domain with a max shift.
pub fn product_form(ss: &StateSpace, rates: &FixedRates) -> Result<StationaryDistribution> {
    if rates.n_nodes() != ss.n_nodes() {
        return Err(Error::Domain(format!(
            "{} rates for {} nodes",
            rates.n_nodes(),
            ss.n_nodes()
        )));
    }
    let ln_sigma: Vec<f64> = rates.sigma().iter().map(|s| s.ln()).collect();
    if let Some(i) = ln_sigma.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericRange(format!(
            "ln σ_{i} = {} is not representable",
            ln_sigma[i]
        )));
    }
    let log_w: Vec<f64> = ss
        .states()
        .iter()
        .map(|u| u.active_nodes().map(|i| ln_sigma[i]).sum())
        .collect();
    let shift = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_w.iter().map(|w| (w - shift).exp()).collect();
    // Summing smallest-first limits cancellation-free rounding growth.
    let mut sorted = scaled.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let total: f64 = sorted.iter().sum();
    let log_z = shift + total.ln();
    if !log_z.is_finite() {
        return Err(Error::NumericRange(format!("ln Z = {log_z}")));
    }
    let pi: Vec<f64> = scaled.iter().map(|w| w / total).collect();
    Ok(StationaryDistribution::from_pi(ss, pi, log_z))
}

/// Uniform activity factor `σ` at which `min_i θ_i` equals `target`.
///
/// Bisection on `ln σ` over `[1e-9, 1e9]`; `min_i θ_i` is assumed
/// increasing in `σ`, as on vertex-transitive and complete partite graphs.
pub fn uniform_sigma_for_theta(ss: &StateSpace, target: f64) -> Result<f64> {
    let n = ss.n_nodes();
    let min_theta = |ln_sigma: f64| -> Result<f64> {
        let d = product_form(ss, &FixedRates::uniform(n, ln_sigma.exp())?)?;
        Ok(d.theta.iter().cloned().fold(f64::INFINITY, f64::min))
    };
    let (mut lo, mut hi) = (-9.0 * std::f64::consts::LN_10, 9.0 * std::f64::consts::LN_10);
    let (t_lo, t_hi) = (min_theta(lo)?, min_theta(hi)?);
    if !(target > t_lo && target < t_hi) {
        return Err(Error::Domain(format!(
            "target θ = {target} outside the reachable range ({t_lo}, {t_hi})"
        )));
    }
    while hi - lo > 1e-13 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if min_theta(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    fn ss(spec: TopologySpec) -> StateSpace {
        enumerate_state_space(&build_topology(&spec).unwrap()).unwrap()
    }

    #[test]
    fn single_node_unit_sigma() {
        let s = ss(TopologySpec::Explicit { n: 1, edges: vec![], labels: None });
        let d = product_form(&s, &FixedRates::uniform(1, 1.0).unwrap()).unwrap();
        assert_eq!(d.pi, vec![0.5, 0.5]);
        assert_eq!(d.theta, vec![0.5]);
    }

    #[test]
    fn k55_theta_is_16_over_63() {
        let s = ss(TopologySpec::CompletePartite { sizes: vec![5, 5] });
        let d = product_form(&s, &FixedRates::uniform(10, 1.0).unwrap()).unwrap();
        assert!((d.z() - 63.0).abs() < 1e-12);
        for t in &d.theta {
            assert!((t - 16.0 / 63.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_for_theta_inverts() {
        let s = ss(TopologySpec::CompletePartite { sizes: vec![5, 5] });
        let sigma = uniform_sigma_for_theta(&s, 16.0 / 63.0).unwrap();
        assert!((sigma - 1.0).abs() < 1e-10, "{sigma}");
        assert!(uniform_sigma_for_theta(&s, 0.6).is_err());
    }

    #[test]
    fn line3() {
        let s = ss(TopologySpec::Line { n: 3 });
        let d = product_form(&s, &FixedRates::uniform(3, 1.0).unwrap()).unwrap();
        assert!((d.z() - 5.0).abs() < 1e-12);
        assert!((d.theta[1] - 0.2).abs() < 1e-15);
        assert!((d.theta[0] - 0.4).abs() < 1e-15);
        assert!((d.theta[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn huge_sigma_stays_finite() {
        let s = ss(TopologySpec::CompletePartite { sizes: vec![5, 5] });
        let d = product_form(&s, &FixedRates::uniform(10, 1e80).unwrap()).unwrap();
        assert!(d.z().is_infinite());
        assert!(d.log_z.is_finite());
        let total: f64 = d.pi.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let v1 = s.index_of(crate::topology::ActivityState(0b11111)).unwrap();
        assert!((d.pi[v1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rate_validation() {
        assert!(FixedRates::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(FixedRates::new(vec![1.0], vec![1.0, 1.0]).is_err());
        let r = FixedRates::from_probabilities(&[2.0], &[0.5], &[1.0], &[0.25]).unwrap();
        assert_eq!(r.sigma(), &[4.0]);
    }
}
