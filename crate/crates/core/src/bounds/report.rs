use std::fmt;

use crate::topology::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    /// Single-server clique bound.
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

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eq2 => "eq2",
            Self::Thm1i => "thm1i",
            Self::Thm1ii => "thm1ii",
            Self::Thm1iii => "thm1iii",
            Self::Prop1 => "prop1",
            Self::Prop2 => "prop2",
            Self::Thm2 => "thm2",
            Self::Thm3 => "thm3",
            Self::Thm4 => "thm4",
            Self::Thm5 => "thm5",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What quantity a bound is a lower bound for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundTarget {
    AggregateQueue,
    WeightedQueue,
    PerNodeQueue,
    MixingTime,
}

impl BoundTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AggregateQueue => "aggregate_queue",
            Self::WeightedQueue => "weighted_queue",
            Self::PerNodeQueue => "per_node_queue",
            Self::MixingTime => "mixing_time",
        }
    }

    pub fn is_queue(self) -> bool {
        self != Self::MixingTime
    }
}

impl fmt::Display for BoundTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A candidate state subset with a stable label.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub set: StateSet,
}

impl Candidate {
    pub fn new(label: impl Into<String>, set: StateSet) -> Self {
        Self { label: label.into(), set }
    }
}

/// The object attaining a bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Clique(Vec<usize>),
    CliqueCover(Vec<Vec<usize>>),
    Subset { label: String, size: usize },
    /// Node subset `S` inside component `k`.
    NodeSet { component: usize, nodes: Vec<usize> },
    Component(usize),
    None,
}

impl Witness {
    pub fn descriptor(&self) -> String {
        let nodes = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            Self::Clique(c) => format!("clique[{}]", nodes(c)),
            Self::CliqueCover(cs) => format!(
                "cover[{}]",
                cs.iter().map(|c| nodes(c)).collect::<Vec<_>>().join("|")
            ),
            Self::Subset { label, size } => format!("subset[{label};{size}]"),
            Self::NodeSet { component, nodes: s } => format!("nodes[V{};{}]", component + 1, nodes(s)),
            Self::Component(k) => format!("component[V{}]", k + 1),
            Self::None => "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub target: BoundTarget,
    /// Clamped at zero.
    pub value: f64,
    /// `log10` of the unclamped positive value; `-∞` when vacuous.
    pub log10_value: f64,
    pub vacuous: bool,
    pub witness: Witness,
    /// Total load the bound was evaluated at.
    pub rho: f64,
    pub parameters: Vec<(String, f64)>,
    /// Queue bound divided by the matching arrival rate (Little's law).
    pub delay_equivalent: Option<f64>,
}

impl BoundReport {
    /// Builds a report from a log10 value, so values far below `f64::MIN_POSITIVE`
    /// still carry information.
    pub fn from_log10(
        kind: BoundKind,
        target: BoundTarget,
        log10_value: f64,
        witness: Witness,
        rho: f64,
    ) -> Self {
        let vacuous = !(log10_value > f64::NEG_INFINITY) || log10_value.is_nan();
        Self {
            kind,
            target,
            value: if vacuous { 0.0 } else { 10f64.powf(log10_value) },
            log10_value: if vacuous { f64::NEG_INFINITY } else { log10_value },
            vacuous,
            witness,
            rho,
            parameters: Vec::new(),
            delay_equivalent: None,
        }
    }

    pub fn from_value(kind: BoundKind, target: BoundTarget, value: f64, witness: Witness, rho: f64) -> Self {
        let log10 = if value > 0.0 { value.log10() } else { f64::NEG_INFINITY };
        let mut r = Self::from_log10(kind, target, log10, witness, rho);
        if value > 0.0 {
            r.value = value;
        }
        r
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    /// Sets `delay_equivalent = value / arrival_rate` for queue targets.
    pub fn with_arrivals(mut self, arrival_rate: f64) -> Self {
        if self.target.is_queue() && arrival_rate > 0.0 {
            self.delay_equivalent = Some(self.value / arrival_rate);
            self.parameters.push(("arrival_rate".into(), arrival_rate));
        }
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}
