//! Experiment configuration (TOML).
//!
//! Physical rates have no defaults: `traffic.mu`, the load sweep and every
//! strategy rate must be given. Tolerances and caps have the defaults listed
//! on each field.

use std::path::Path;

use serde::Deserialize;

use csma_core::bounds::RateFamily;
use csma_core::sim::{NodeRule, QueueFn, Strategy};
use csma_core::topology::TopologySpec;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario id used in result rows; default `"scenario"`.
    #[serde(default = "default_scenario")]
    pub scenario: String,
    pub topology: TopologySection,
    pub traffic: TrafficSection,
    #[serde(default, rename = "strategy")]
    pub strategies: Vec<StrategySection>,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default, rename = "candidates")]
    pub candidates: Vec<CandidateSpec>,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub mixing: MixingSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub caps: CapsSection,
}

fn default_scenario() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    /// Compact descriptor, e.g. `complete_partite(5,5)` or `grid(4,4,wrap)`.
    pub descriptor: String,
    /// Explicit partite components; default: the family's natural split.
    pub components: Option<Vec<Vec<usize>>>,
}

impl TopologySection {
    pub fn spec(&self) -> Result<TopologySpec, CliError> {
        self.descriptor.parse().map_err(CliError::from)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerNode {
    Uniform(f64),
    Nodes(Vec<f64>),
}

impl PerNode {
    pub fn expand(&self, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
        match self {
            PerNode::Uniform(x) => Ok(vec![*x; n]),
            PerNode::Nodes(v) if v.len() == n => Ok(v.clone()),
            PerNode::Nodes(v) => Err(CliError::Validation(format!("{what} has {} entries for {n} nodes", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    /// Service rates `μ_i`.
    pub mu: PerNode,
    /// Load sweep as a list.
    pub rho: Option<Vec<f64>>,
    /// Load sweep as an inclusive range.
    pub rho_range: Option<RangeSpec>,
    /// Split weights: per component with a partite decomposition (default
    /// symmetric), otherwise per node (default all 1, so every node carries
    /// load `ρ`).
    pub split: Option<Vec<f64>>,
}

impl TrafficSection {
    pub fn sweep(&self) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::new();
        if let Some(list) = &self.rho {
            out.extend(list);
        }
        if let Some(r) = &self.rho_range {
            if !(r.step > 0.0) || r.stop < r.start {
                return Err(CliError::Validation("traffic.rho_range needs step > 0 and stop ≥ start".into()));
            }
            let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
            out.extend((0..=count).map(|j| (r.start + j as f64 * r.step) * 1e12).map(|x| x.round() / 1e12));
        }
        if out.is_empty() {
            return Err(CliError::Validation("traffic needs rho or rho_range".into()));
        }
        if let Some(&bad) = out.iter().find(|&&r| !(0.0..1.0).contains(&r)) {
            return Err(CliError::Validation(format!("sweep value ρ = {bad} is outside [0, 1)")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySection {
    Fixed {
        name: Option<String>,
        nu: PerNode,
        mu_deact: PerNode,
    },
    QueueBased {
        name: Option<String>,
        f: QueueFn,
        g: QueueFn,
        #[serde(default)]
        dummy_packets: bool,
    },
}

impl StrategySection {
    pub fn build(&self, n: usize) -> Result<Strategy, CliError> {
        Ok(match self {
            StrategySection::Fixed { nu, mu_deact, .. } => {
                let nu = nu.expand(n, "strategy.nu")?;
                let md = mu_deact.expand(n, "strategy.mu_deact")?;
                Strategy {
                    rules: nu.into_iter().zip(md).map(|(nu, mu_deact)| NodeRule::Fixed { nu, mu_deact }).collect(),
                    dummy_packets: true,
                }
            }
            StrategySection::QueueBased { f, g, dummy_packets, .. } => Strategy {
                rules: vec![NodeRule::QueueBased { f: f.clone(), g: g.clone() }; n],
                dummy_packets: *dummy_packets,
            },
        })
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            StrategySection::Fixed { name, .. } | StrategySection::QueueBased { name, .. } => name.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    /// Product-form law and activity fractions per fixed strategy; default on.
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Flows and bottleneck ratios of the candidate subsets; default on.
    #[serde(default = "yes")]
    pub subsets: bool,
}

impl Default for StationarySection {
    fn default() -> Self {
        Self { enabled: true, subsets: true }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSelection {
    Eq2,
    Thm1i,
    Thm1ii,
    Thm1iii,
    Prop1,
    Prop2,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default)]
    pub enabled: bool,
    /// Bounds to evaluate; default every applicable one.
    pub kinds: Option<Vec<BoundSelection>>,
    /// `ε` for mixing-time bounds; default 0.05.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// `γ` for the extension bounds; default `max(0.01, 1.0001 γ_min)` at each `ρ`.
    pub gamma: Option<f64>,
    /// Queue weights `w`; default all 1.
    pub weights: Option<Vec<f64>>,
    /// Node subset `S`; default the first component (or all nodes).
    pub nodes: Option<Vec<usize>>,
    /// Rate family for the queue-based clique bounds.
    pub family: Option<RateFamily>,
    /// Activity factors `ξ_i`; default all 1.
    pub xi: Option<Vec<f64>>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            enabled: false,
            kinds: None,
            epsilon: default_epsilon(),
            gamma: None,
            weights: None,
            nodes: None,
            family: None,
            xi: None,
        }
    }
}

fn default_epsilon() -> f64 {
    0.05
}

impl BoundsSection {
    pub fn wants(&self, kind: BoundSelection) -> bool {
        self.kinds.as_ref().is_none_or(|k| k.contains(&kind))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSpec {
    /// `B_k` and `Ω \ B_k` for every component.
    Components,
    /// Path sets `S_l(S)` and complements for the bound subset `S`.
    PathSets,
    /// `Ω \ {u}` for every state.
    SingletonComplements,
    /// Explicit states as bit strings `u_1 u_2 ... u_N`.
    Explicit { label: String, states: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default)]
    pub enabled: bool,
    /// Explicit seeds; otherwise `replications` seeds from `seed`.
    pub seeds: Option<Vec<u64>>,
    /// Default 1.
    #[serde(default = "one")]
    pub replications: u64,
    /// Default 1.
    #[serde(default = "one")]
    pub seed: u64,
    /// Default 1e6.
    #[serde(default = "default_horizon")]
    pub initial_horizon: f64,
    /// Default 6.
    #[serde(default = "default_doublings")]
    pub max_doublings: u32,
    /// Largest window length; overrides `max_doublings` when set.
    pub horizon_cap: Option<f64>,
    /// Default 0.05.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Default true.
    #[serde(default = "yes")]
    pub tag_packets: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            enabled: false,
            seeds: None,
            replications: 1,
            seed: 1,
            initial_horizon: default_horizon(),
            max_doublings: default_doublings(),
            horizon_cap: None,
            tolerance: default_tolerance(),
            tag_packets: true,
        }
    }
}

fn one() -> u64 {
    1
}

fn default_horizon() -> f64 {
    1e6
}

fn default_doublings() -> u32 {
    6
}

fn default_tolerance() -> f64 {
    0.05
}

impl SimulationSection {
    pub fn seed_list(&self, base_override: Option<u64>) -> Vec<u64> {
        match (&self.seeds, base_override) {
            (Some(s), None) => s.clone(),
            (Some(s), Some(b)) => (0..s.len() as u64).map(|j| b + j).collect(),
            (None, b) => {
                let base = b.unwrap_or(self.seed);
                (0..self.replications.max(1)).map(|j| base + j).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSection {
    #[serde(default)]
    pub enabled: bool,
    /// Default `[0.05]`.
    #[serde(default = "default_eps_list")]
    pub epsilon: Vec<f64>,
}

impl Default for MixingSection {
    fn default() -> Self {
        Self { enabled: false, epsilon: default_eps_list() }
    }
}

fn default_eps_list() -> Vec<f64> {
    vec![0.05]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Default `out`.
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsSection {
    /// Default 5,000,000 states.
    #[serde(default = "default_state_cap")]
    pub states: usize,
    /// Default 4096 states.
    #[serde(default = "default_mixing_cap")]
    pub mixing_states: usize,
    /// Default 1e9 packets.
    #[serde(default = "default_queue_cap")]
    pub queue: u64,
}

impl Default for CapsSection {
    fn default() -> Self {
        Self { states: default_state_cap(), mixing_states: default_mixing_cap(), queue: default_queue_cap() }
    }
}

fn default_state_cap() -> usize {
    csma_core::topology::DEFAULT_STATE_CAP
}

fn default_mixing_cap() -> usize {
    csma_core::stationary::DEFAULT_MIXING_CAP
}

fn default_queue_cap() -> u64 {
    csma_core::sim::DEFAULT_QUEUE_CAP
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate_shallow()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks that need no graph.
    fn validate_shallow(&self) -> Result<(), CliError> {
        self.traffic.sweep()?;
        if !(self.stationary.enabled || self.bounds.enabled || self.simulation.enabled || self.mixing.enabled) {
            return Err(CliError::Validation(
                "enable at least one of stationary, bounds, simulation, mixing".into(),
            ));
        }
        if self.simulation.enabled && self.strategies.is_empty() {
            return Err(CliError::Validation("simulation needs at least one [[strategy]]".into()));
        }
        if !(self.bounds.epsilon > 0.0 && self.bounds.epsilon < 0.5) {
            return Err(CliError::Validation("bounds.epsilon must lie in (0, 1/2)".into()));
        }
        if let Some(&e) = self.mixing.epsilon.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return Err(CliError::Validation(format!("mixing.epsilon {e} must lie in (0, 1/2)")));
        }
        if let Some(f) = &self.bounds.family {
            f.validate()?;
        }
        Ok(())
    }

    /// A small default configuration exercising every section.
    pub fn default_toml() -> &'static str {
        include_str!("../assets/default.toml")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let c = ExperimentConfig::from_toml(ExperimentConfig::default_toml()).unwrap();
        assert!(c.bounds.enabled && c.simulation.enabled);
        assert_eq!(c.topology.spec().unwrap(), TopologySpec::CompletePartite { sizes: vec![2, 2] });
    }

    #[test]
    fn sweep_range() {
        let t = TrafficSection {
            mu: PerNode::Uniform(1.0),
            rho: None,
            rho_range: Some(RangeSpec { start: 0.1, stop: 0.9, step: 0.1 }),
            split: None,
        };
        let s = t.sweep().unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[2], 0.3);
        assert_eq!(s[8], 0.9);
    }

    #[test]
    fn errors_name_the_field() {
        let text = "[topology]\ndescriptor = \"line(2)\"\n[traffic]\nmu = 1.0\nrho = [0.2]\nbogus = 3\n";
        match ExperimentConfig::from_toml(text) {
            Err(CliError::Parse(m)) => assert!(m.contains("bogus") && m.contains("line 6"), "{m}"),
            other => panic!("{other:?}"),
        }
        let text = "[topology]\ndescriptor = \"line(2)\"\n[traffic]\nrho = [0.2]\n";
        match ExperimentConfig::from_toml(text) {
            Err(CliError::Parse(m)) => assert!(m.contains("mu"), "{m}"),
            other => panic!("{other:?}"),
        }
        let text = "[topology]\ndescriptor = \"line(2)\"\n[traffic]\nmu = 1.0\nrho = [1.2]\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(CliError::Validation(_))));
    }
}
