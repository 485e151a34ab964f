//! A validated configuration bound to its graph.

use csma_core::bounds::{
    component_candidates, partite_sets, path_candidates, singleton_complement_candidates, Candidate,
    TrafficProfile,
};
use csma_core::sim::Strategy;
use csma_core::stationary::FixedRates;
use csma_core::topology::{
    build_topology, enumerate_state_space_capped, partite_decomposition, ActivityState, InterferenceGraph,
    PartiteDecomposition, StateSet, StateSpace,
};

use crate::config::{CandidateSpec, ExperimentConfig};
use crate::{CliError, Result};

/// A strategy with the name used in output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedStrategy {
    pub name: String,
    pub strategy: Strategy,
    /// Product-form rates for fixed strategies.
    pub rates: Option<FixedRates>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub graph: InterferenceGraph,
    /// Enumerated only when an exact analysis is requested.
    pub space: Option<StateSpace>,
    pub decomposition: Option<PartiteDecomposition>,
    pub mu: Vec<f64>,
    pub sweep: Vec<f64>,
    pub strategies: Vec<NamedStrategy>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl Scenario {
    /// Builds the graph and checks every index in the configuration against it.
    pub fn build(config: ExperimentConfig, need_space: bool) -> Result<Self> {
        let graph = build_topology(&config.topology.spec()?)?;
        let n = graph.n_nodes();
        let decomposition = match &config.topology.components {
            Some(c) => Some(partite_decomposition(&graph, Some(c))?),
            None => partite_decomposition(&graph, None).ok(),
        };
        let mu = config.traffic.mu.expand(n, "traffic.mu")?;
        if let Some(i) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(bad(format!("traffic.mu[{i}] = {} must be positive", mu[i])));
        }
        let sweep = config.traffic.sweep()?;
        if let Some(split) = &config.traffic.split {
            let want = decomposition.as_ref().map_or(n, |d| d.k());
            if split.len() != want {
                return Err(bad(format!("traffic.split has {} weights, expected {want}", split.len())));
            }
            if split.iter().any(|&w| !(w >= 0.0)) || !(split.iter().sum::<f64>() > 0.0) {
                return Err(bad("traffic.split weights must be non-negative with positive sum"));
            }
        }
        let b = &config.bounds;
        for (what, v) in [("bounds.weights", &b.weights), ("bounds.xi", &b.xi)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(bad(format!("{what} has {} entries for {n} nodes", v.len())));
                }
            }
        }
        if let Some(nodes) = &b.nodes {
            if let Some(&i) = nodes.iter().find(|&&i| i >= n) {
                return Err(bad(format!("bounds.nodes refers to node {i}; the graph has {n} nodes")));
            }
            if nodes.is_empty() {
                return Err(bad("bounds.nodes is empty"));
            }
        }
        let mut strategies = Vec::with_capacity(config.strategies.len());
        for (j, s) in config.strategies.iter().enumerate() {
            let strategy = s.build(n)?;
            let rates = if strategy.is_fixed() {
                let (nu, md): (Vec<f64>, Vec<f64>) = strategy
                    .rules
                    .iter()
                    .map(|r| match r {
                        csma_core::sim::NodeRule::Fixed { nu, mu_deact } => (*nu, *mu_deact),
                        csma_core::sim::NodeRule::QueueBased { .. } => unreachable!(),
                    })
                    .unzip();
                Some(FixedRates::new(nu, md).map_err(|e| bad(format!("strategy {j}: {e}")))?)
            } else {
                None
            };
            let name = s.name().map(str::to_string).unwrap_or_else(|| strategy.label());
            if strategies.iter().any(|x: &NamedStrategy| x.name == name) {
                return Err(bad(format!("duplicate strategy name {name:?}")));
            }
            strategies.push(NamedStrategy { name, strategy, rates });
        }
        let space = if need_space {
            Some(
                enumerate_state_space_capped(&graph, config.caps.states)
                    .map_err(|e| CliError::Resource(format!("{e} (raise caps.states)")))?,
            )
        } else {
            None
        };
        let scn = Self { config, graph, space, decomposition, mu, sweep, strategies };
        scn.check_candidates()?;
        Ok(scn)
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn space(&self) -> Result<&StateSpace> {
        self.space.as_ref().ok_or_else(|| bad("state space was not enumerated"))
    }

    pub fn fixed(&self) -> impl Iterator<Item = (&NamedStrategy, &FixedRates)> {
        self.strategies.iter().filter_map(|s| s.rates.as_ref().map(|r| (s, r)))
    }

    /// `λ_i = ρ_i μ_i`. With a partite decomposition the scalar `ρ` is split
    /// over components (`ρ̂_k`, symmetric by default) and every node of `V_k`
    /// carries `ρ̂_k`; otherwise node `i` carries `ρ · split_i` (default `ρ`).
    pub fn traffic(&self, rho: f64) -> Result<TrafficProfile> {
        let n = self.n_nodes();
        let split = self.config.traffic.split.clone();
        let loads: Vec<f64> = match &self.decomposition {
            Some(d) => {
                let w = split.unwrap_or_else(|| vec![1.0; d.k()]);
                let total: f64 = w.iter().sum();
                (0..n).map(|i| rho * w[d.component_of(i)] / total).collect()
            }
            None => {
                let w = split.unwrap_or_else(|| vec![1.0; n]);
                w.iter().map(|x| rho * x).collect()
            }
        };
        let lambda: Vec<f64> = loads.iter().zip(&self.mu).map(|(r, m)| r * m).collect();
        let tp = TrafficProfile::new(lambda, self.mu.clone())?;
        Ok(match &self.decomposition {
            Some(d) => tp.with_partite(d)?,
            None => tp,
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.config.bounds.weights.clone().unwrap_or_else(|| vec![1.0; self.n_nodes()])
    }

    pub fn xi(&self) -> Vec<f64> {
        self.config.bounds.xi.clone().unwrap_or_else(|| vec![1.0; self.n_nodes()])
    }

    /// Bound subset `S`: configured, else the first component, else all nodes.
    pub fn bound_nodes(&self) -> Vec<usize> {
        if let Some(s) = &self.config.bounds.nodes {
            return s.clone();
        }
        match &self.decomposition {
            Some(d) => d.component(0).to_vec(),
            None => (0..self.n_nodes()).collect(),
        }
    }

    fn check_candidates(&self) -> Result<()> {
        let n = self.n_nodes();
        for c in &self.config.candidates {
            match c {
                CandidateSpec::Components | CandidateSpec::PathSets if self.decomposition.is_none() => {
                    return Err(bad("component and path-set candidates need a partite decomposition"));
                }
                CandidateSpec::Explicit { label, states } => {
                    for s in states {
                        let u = parse_state(s, n).map_err(|m| bad(format!("candidate {label:?}: {m}")))?;
                        if !self.graph.is_independent(u.0) {
                            return Err(bad(format!("candidate {label:?}: state {s} is not feasible")));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Candidate subsets for the bottleneck bounds. Defaults: the component
    /// sets `B_k` when a decomposition exists, else singleton complements.
    pub fn candidates(&self, tp: &TrafficProfile) -> Result<Vec<Candidate>> {
        let ss = self.space()?;
        let n = self.n_nodes();
        let specs: Vec<CandidateSpec> = if self.config.candidates.is_empty() {
            vec![if self.decomposition.is_some() { CandidateSpec::Components } else { CandidateSpec::SingletonComplements }]
        } else {
            self.config.candidates.clone()
        };
        let mut out = Vec::new();
        for spec in &specs {
            match spec {
                CandidateSpec::Components => {
                    out.extend(component_candidates(ss, self.decomposition.as_ref().expect("checked")));
                }
                CandidateSpec::PathSets => {
                    let d = self.decomposition.as_ref().expect("checked");
                    // Path sets need S inside one component with a nonempty drift set.
                    if let Ok(ps) = partite_sets(ss, d, tp, &self.weights(), &self.bound_nodes()) {
                        out.extend(path_candidates(&ps));
                    }
                }
                CandidateSpec::SingletonComplements => out.extend(singleton_complement_candidates(ss)),
                CandidateSpec::Explicit { label, states } => {
                    let idx = states.iter().map(|s| {
                        let u = parse_state(s, n).expect("checked");
                        ss.index_of(u).expect("feasible states are enumerated")
                    });
                    out.push(Candidate::new(label.clone(), StateSet::from_indices(ss.len(), idx)));
                }
            }
        }
        Ok(out)
    }
}

/// `u_1 u_2 ... u_N` as a 0/1 string.
pub fn parse_state(text: &str, n: usize) -> std::result::Result<ActivityState, String> {
    if text.len() != n {
        return Err(format!("state {text:?} has {} digits for {n} nodes", text.len()));
    }
    let mut u = 0u64;
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => u |= 1 << i,
            _ => return Err(format!("state {text:?} must contain only 0 and 1")),
        }
    }
    Ok(ActivityState(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "[topology]\ndescriptor = \"complete_partite(2,3)\"\n[traffic]\nmu = 2.0\nrho = [0.4]\n{extra}\n[stationary]\nenabled = true\n"
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn partite_load_split() {
        let s = Scenario::build(config("split = [1.0, 3.0]"), false).unwrap();
        let tp = s.traffic(0.4).unwrap();
        assert_eq!(tp.rho_hat, vec![0.1, 0.30000000000000004]);
        assert!((tp.rho_total - 0.4).abs() < 1e-15);
        assert_eq!(tp.lambda[0], 0.2);
    }

    #[test]
    fn indices_are_checked() {
        let mut c = config("");
        c.bounds.nodes = Some(vec![7]);
        assert!(matches!(Scenario::build(c, false), Err(CliError::Validation(m)) if m.contains("node 7")));
        let c = config("split = [1.0]");
        assert!(Scenario::build(c, false).is_err());
    }

    #[test]
    fn explicit_candidates() {
        let mut c = config("");
        c.candidates = vec![CandidateSpec::Explicit { label: "pair".into(), states: vec!["11000".into(), "00000".into()] }];
        let s = Scenario::build(c.clone(), true).unwrap();
        let cands = s.candidates(&s.traffic(0.4).unwrap()).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].set.len(), 2);
        c.candidates = vec![CandidateSpec::Explicit { label: "bad".into(), states: vec!["10100".into()] }];
        assert!(Scenario::build(c, true).is_err());
    }

    #[test]
    fn state_space_cap_is_a_resource_error() {
        let mut c = config("");
        c.caps.states = 5;
        let e = Scenario::build(c, true).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
