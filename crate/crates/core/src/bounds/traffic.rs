use crate::error::{Error, Result};
use crate::topology::PartiteDecomposition;

/// Arrival and service rates together with the derived loads.
///
/// `rho_hat`, `rho_total` and `rho_min` are only meaningful once the profile
/// is tied to a partite decomposition; for a bare profile `rho_hat` is empty
/// and `rho_total`/`rho_min` summarize the per-node loads.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    /// Per-component load `ρ̂_k`.
    pub rho_hat: Vec<f64>,
    /// `ρ = Σ_k ρ̂_k`.
    pub rho_total: f64,
    /// `min_k ρ̂_k`.
    pub rho_min: f64,
}

impl TrafficProfile {
    pub fn new(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if lambda.len() != mu.len() {
            return Err(Error::Domain(format!(
                "{} arrival rates for {} service rates",
                lambda.len(),
                mu.len()
            )));
        }
        for (i, (&l, &m)) in lambda.iter().zip(&mu).enumerate() {
            if !(l >= 0.0 && l.is_finite() && m > 0.0 && m.is_finite()) {
                return Err(Error::Domain(format!(
                    "node {i}: need λ ≥ 0 and μ > 0 (λ = {l}, μ = {m})"
                )));
            }
        }
        let rho: Vec<f64> = lambda.iter().zip(&mu).map(|(l, m)| l / m).collect();
        let rho_total = rho.iter().cloned().fold(0.0, f64::max);
        let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            lambda,
            mu,
            rho,
            rho_hat: Vec::new(),
            rho_total,
            rho_min: if rho_min.is_finite() { rho_min } else { 0.0 },
        })
    }

    /// Unit service rates, so `λ_i = ρ_i`.
    pub fn from_loads(rho: Vec<f64>) -> Result<Self> {
        let mu = vec![1.0; rho.len()];
        Self::new(rho, mu)
    }

    /// Per-component loads `ρ̂_k` spread over the nodes of each component,
    /// with unit service rates.
    pub fn from_component_loads(d: &PartiteDecomposition, rho_hat: &[f64]) -> Result<Self> {
        if rho_hat.len() != d.k() {
            return Err(Error::Domain(format!(
                "{} component loads for {} components",
                rho_hat.len(),
                d.k()
            )));
        }
        let rho: Vec<f64> = (0..d.n_nodes()).map(|i| rho_hat[d.component_of(i)]).collect();
        Self::from_loads(rho)?.with_partite(d)
    }

    /// Symmetric split `ρ̂_k = ρ / K`.
    pub fn symmetric(d: &PartiteDecomposition, rho: f64) -> Result<Self> {
        Self::from_component_loads(d, &vec![rho / d.k() as f64; d.k()])
    }

    /// Split `ρ` over components proportionally to `weights`.
    pub fn split(d: &PartiteDecomposition, rho: f64, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Domain("split weights must be non-negative with positive sum".into()));
        }
        let rho_hat: Vec<f64> = weights.iter().map(|w| rho * w / total).collect();
        Self::from_component_loads(d, &rho_hat)
    }

    /// Attaches component loads, requiring `ρ_i` to be constant on each
    /// component.
    pub fn with_partite(mut self, d: &PartiteDecomposition) -> Result<Self> {
        if d.n_nodes() != self.rho.len() {
            return Err(Error::Domain(format!(
                "profile has {} nodes, decomposition {}",
                self.rho.len(),
                d.n_nodes()
            )));
        }
        let mut rho_hat = Vec::with_capacity(d.k());
        for (k, comp) in d.components().iter().enumerate() {
            let r = self.rho[comp[0]];
            if let Some(&i) = comp.iter().find(|&&i| (self.rho[i] - r).abs() > 1e-12 * r.max(1.0)) {
                return Err(Error::Domain(format!(
                    "component {k}: ρ_{i} = {} differs from ρ_{} = {r}",
                    self.rho[i], comp[0]
                )));
            }
            rho_hat.push(r);
        }
        self.rho_total = rho_hat.iter().sum();
        self.rho_min = rho_hat.iter().cloned().fold(f64::INFINITY, f64::min);
        self.rho_hat = rho_hat;
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.rho.len()
    }

    /// `λ_C`.
    pub fn lambda_of(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&i| self.lambda[i]).sum()
    }

    /// `ρ_C`.
    pub fn rho_of(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&i| self.rho[i]).sum()
    }

    /// `Σ_{i∈S} w_i λ_i`.
    pub fn weighted_arrivals(&self, weights: &[f64], nodes: &[usize]) -> f64 {
        nodes.iter().map(|&i| weights[i] * self.lambda[i]).sum()
    }
}
