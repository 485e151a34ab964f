//! Activation and de-activation rules.

use serde::{Deserialize, Serialize};

use crate::bounds::TrafficProfile;
use crate::error::{Error, Result};
use crate::stationary::FixedRates;

/// A rate as a function of the queue length `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueueFn {
    Constant { value: f64 },
    /// `slope · x + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `scale · x^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `scale · ln(1 + x)`.
    Log { scale: f64 },
    /// `factor · inner(max(x + shift, 0))`.
    Scaled { factor: f64, shift: f64, inner: Box<QueueFn> },
}

impl QueueFn {
    pub fn constant(value: f64) -> Self {
        QueueFn::Constant { value }
    }

    /// `f(x) = x`.
    pub fn identity() -> Self {
        QueueFn::Affine { slope: 1.0, intercept: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            QueueFn::Constant { value } => *value,
            QueueFn::Affine { slope, intercept } => slope * x + intercept,
            QueueFn::Power { scale, exponent } => {
                if x == 0.0 {
                    if *exponent == 0.0 {
                        *scale
                    } else {
                        0.0
                    }
                } else {
                    scale * x.powf(*exponent)
                }
            }
            QueueFn::Log { scale } => scale * x.ln_1p(),
            QueueFn::Scaled { factor, shift, inner } => factor * inner.eval((x + shift).max(0.0)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            QueueFn::Constant { value } => format!("{value}"),
            QueueFn::Affine { slope, intercept } => match (*slope, *intercept) {
                (s, i) if s == 1.0 && i == 0.0 => "x".into(),
                (s, i) if i == 0.0 => format!("{s}x"),
                (s, i) => format!("{s}x+{i}"),
            },
            QueueFn::Power { scale, exponent } => format!("{scale}x^{exponent}"),
            QueueFn::Log { scale } => format!("{scale}ln(1+x)"),
            QueueFn::Scaled { factor, shift, inner } => {
                format!("{factor}*({})(x{shift:+})", inner.describe())
            }
        }
    }
}

/// Rule of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NodeRule {
    /// Constant activation rate `nu` and de-activation rate `mu_deact`.
    Fixed { nu: f64, mu_deact: f64 },
    /// Activation rate `f(L)` and de-activation rate `g(L)`.
    QueueBased { f: QueueFn, g: QueueFn },
}

impl NodeRule {
    /// Probability formulation: `f(x) = ν φ(x)`, `g(x) = μ ψ(x − 1)`.
    pub fn from_probabilities(nu: f64, phi: QueueFn, mu: f64, psi: QueueFn) -> Self {
        NodeRule::QueueBased {
            f: QueueFn::Scaled { factor: nu, shift: 0.0, inner: Box::new(phi) },
            g: QueueFn::Scaled { factor: mu, shift: -1.0, inner: Box::new(psi) },
        }
    }

    pub fn activation(&self, queue: u64) -> f64 {
        match self {
            NodeRule::Fixed { nu, .. } => *nu,
            NodeRule::QueueBased { f, .. } => f.eval(queue as f64),
        }
    }

    pub fn deactivation(&self, queue: u64) -> f64 {
        match self {
            NodeRule::Fixed { mu_deact, .. } => *mu_deact,
            NodeRule::QueueBased { g, .. } => g.eval(queue as f64),
        }
    }
}

/// Per-node rules plus the dummy-packet convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub rules: Vec<NodeRule>,
    /// Nodes may be active with an empty buffer. When off, an empty node
    /// never activates and a node releases the medium when its buffer empties.
    pub dummy_packets: bool,
}

/// Queue lengths at which rate functions are probed during validation.
fn probes() -> impl Iterator<Item = u64> {
    (0..=64u64).chain((7..=30).map(|e| 1u64 << e))
}

impl Strategy {
    pub fn fixed(n: usize, nu: f64, mu_deact: f64) -> Self {
        Self { rules: vec![NodeRule::Fixed { nu, mu_deact }; n], dummy_packets: true }
    }

    pub fn queue_based(n: usize, f: QueueFn, g: QueueFn) -> Self {
        Self { rules: vec![NodeRule::QueueBased { f, g }; n], dummy_packets: false }
    }

    /// Fixed rules matching a product-form rate vector.
    pub fn from_fixed_rates(rates: &FixedRates) -> Self {
        let rules = rates
            .nu()
            .iter()
            .zip(rates.mu_deact())
            .map(|(&nu, &mu_deact)| NodeRule::Fixed { nu, mu_deact })
            .collect();
        Self { rules, dummy_packets: true }
    }

    pub fn n_nodes(&self) -> usize {
        self.rules.len()
    }

    /// Whether the activity process is independent of the queues.
    pub fn is_fixed(&self) -> bool {
        self.dummy_packets && self.rules.iter().all(|r| matches!(r, NodeRule::Fixed { .. }))
    }

    /// Checks rates against the service rates: constant rates positive,
    /// `f ≥ 0` and `0 ≤ g ≤ μ` at probed queue lengths.
    pub fn validate(&self, tp: &TrafficProfile) -> Result<()> {
        if self.rules.len() != tp.n_nodes() {
            return Err(Error::Domain(format!(
                "strategy has {} rules for {} nodes",
                self.rules.len(),
                tp.n_nodes()
            )));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            let mu = tp.mu[i];
            match rule {
                NodeRule::Fixed { nu, mu_deact } => {
                    if !(*nu > 0.0 && nu.is_finite() && *mu_deact > 0.0) {
                        return Err(Error::Domain(format!("node {i}: fixed rates must be positive")));
                    }
                    if *mu_deact > mu * (1.0 + 1e-12) {
                        return Err(Error::Domain(format!(
                            "node {i}: de-activation rate {mu_deact} exceeds μ = {mu}"
                        )));
                    }
                }
                NodeRule::QueueBased { f, g } => {
                    for x in probes() {
                        let (fx, gx) = (f.eval(x as f64), g.eval(x as f64));
                        if !(fx >= 0.0 && fx.is_finite()) {
                            return Err(Error::Domain(format!("node {i}: f({x}) = {fx} must be finite and ≥ 0")));
                        }
                        if !(gx >= 0.0 && gx <= mu * (1.0 + 1e-12)) {
                            return Err(Error::Domain(format!("node {i}: g({x}) = {gx} must lie in [0, μ = {mu}]")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Short label for CSV output.
    pub fn label(&self) -> String {
        let first = match self.rules.first() {
            Some(r) => r,
            None => return "empty".into(),
        };
        let uniform = self.rules.iter().all(|r| r == first);
        let base = match first {
            NodeRule::Fixed { nu, mu_deact } => format!("fixed(nu={nu};g={mu_deact})"),
            NodeRule::QueueBased { f, g } => format!("queue(f={};g={})", f.describe(), g.describe()),
        };
        if uniform {
            base
        } else {
            format!("mixed[{base};...]")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_fn_values() {
        assert_eq!(QueueFn::identity().eval(3.0), 3.0);
        assert_eq!(QueueFn::Power { scale: 2.0, exponent: 0.5 }.eval(4.0), 4.0);
        assert_eq!(QueueFn::Power { scale: 2.0, exponent: 0.5 }.eval(0.0), 0.0);
        assert!((QueueFn::Log { scale: 1.0 }.eval(std::f64::consts::E - 1.0) - 1.0).abs() < 1e-15);
        let rule = NodeRule::from_probabilities(2.0, QueueFn::constant(0.5), 1.0, QueueFn::identity());
        assert_eq!(rule.activation(7), 1.0);
        assert_eq!(rule.deactivation(0), 0.0);
        assert_eq!(rule.deactivation(1), 0.0);
        assert_eq!(rule.deactivation(3), 2.0);
    }

    #[test]
    fn validation() {
        let tp = TrafficProfile::new(vec![0.1; 2], vec![1.0; 2]).unwrap();
        assert!(Strategy::fixed(2, 1.0, 1.0).validate(&tp).is_ok());
        assert!(Strategy::fixed(2, 1.0, 1.5).validate(&tp).is_err());
        assert!(Strategy::fixed(2, 0.0, 1.0).validate(&tp).is_err());
        assert!(Strategy::fixed(3, 1.0, 1.0).validate(&tp).is_err());
        let s = Strategy::queue_based(2, QueueFn::identity(), QueueFn::constant(1.0));
        assert!(s.validate(&tp).is_ok());
        let s = Strategy::queue_based(2, QueueFn::identity(), QueueFn::identity());
        assert!(s.validate(&tp).is_err());
        let s = Strategy::queue_based(2, QueueFn::Affine { slope: -1.0, intercept: 1.0 }, QueueFn::constant(1.0));
        assert!(s.validate(&tp).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(Strategy::fixed(3, 1.0, 1.0).label(), "fixed(nu=1;g=1)");
        let s = Strategy::queue_based(2, QueueFn::identity(), QueueFn::constant(1.0));
        assert_eq!(s.label(), "queue(f=x;g=1)");
        assert!(!s.is_fixed());
    }
}
