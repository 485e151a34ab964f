//! The doubling estimation protocol and replications.

use rayon::prelude::*;

use super::engine::{Accumulators, RunStatus, SimConfig, Simulator};
use super::strategy::Strategy;
use crate::bounds::TrafficProfile;
use crate::error::Result;
use crate::topology::InterferenceGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    /// First window length `t`.
    pub initial_horizon: f64,
    /// Times `t` may double before giving up.
    pub max_doublings: u32,
    /// Largest accepted relative gap between the two window averages.
    pub tolerance: f64,
    pub config: SimConfig,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { initial_horizon: 1e6, max_doublings: 6, tolerance: 0.05, config: SimConfig::default() }
    }
}

impl EstimateOptions {
    /// Doubling cap such that `t` never exceeds `cap`.
    pub fn with_horizon_cap(mut self, cap: f64) -> Self {
        let mut t = self.initial_horizon;
        let mut d = 0;
        while t * 2.0 <= cap * (1.0 + 1e-12) {
            t *= 2.0;
            d += 1;
        }
        self.max_doublings = d;
        self
    }

    pub fn horizon_cap(&self) -> f64 {
        self.initial_horizon * 2f64.powi(self.max_doublings as i32)
    }
}

/// Result of the doubling protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub seed: u64,
    pub strategy: String,
    /// Time average of `Σ L_i` over `[0, 2t]`.
    pub mean_total_queue: f64,
    pub per_node_means: Vec<f64>,
    /// Final window length `t`.
    pub horizon_used: f64,
    pub converged: bool,
    /// A queue passed the runaway cap.
    pub runaway: bool,
    /// Averages over `[0, t]` and `[t, 2t]`.
    pub half_averages: (f64, f64),
    pub theta_hat: Vec<f64>,
    /// Per measured clique: mean `L_i` of each clique node at non-serving epochs.
    pub nonserving_means: Vec<Option<Vec<f64>>>,
    /// Per measured clique: fraction of time non-serving.
    pub nonserving_fraction: Vec<f64>,
    /// Mean sojourn per node; `None` when tagging was off or abandoned.
    pub delays: Option<Vec<f64>>,
    pub departures: Vec<u64>,
    pub events: u64,
}

impl SimEstimate {
    fn from_run(
        seed: u64,
        strategy: &Strategy,
        acc: &Accumulators,
        halves: (f64, f64),
        t: f64,
        converged: bool,
        runaway: bool,
        tagging: bool,
    ) -> Self {
        let full = acc.averages();
        let delays = tagging.then(|| {
            acc.sojourn_sum
                .iter()
                .zip(&acc.sojourn_count)
                .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
                .collect()
        });
        Self {
            seed,
            strategy: strategy.label(),
            mean_total_queue: full.mean_total_queue,
            per_node_means: full.per_node_means,
            horizon_used: t,
            converged,
            runaway,
            half_averages: halves,
            theta_hat: full.theta_hat,
            nonserving_means: acc
                .nonserving_time
                .iter()
                .zip(&acc.nonserving_area)
                .map(|(&time, area)| (time > 0.0).then(|| area.iter().map(|a| a / time).collect()))
                .collect(),
            nonserving_fraction: acc.nonserving_time.iter().map(|&x| x / acc.time).collect(),
            delays,
            departures: acc.departures.clone(),
            events: acc.events,
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Doubling protocol with default options: `t = 10^6`, up to 6 doublings.
pub fn estimate_mean_queue(
    g: &InterferenceGraph,
    tp: &TrafficProfile,
    strategy: &Strategy,
    seed: u64,
) -> Result<SimEstimate> {
    estimate_mean_queue_with(g, tp, strategy, seed, &EstimateOptions::default())
}

/// From an empty system, compares the averages over `[0, t]` and `[t, 2t]`;
/// accepts when they are within `tolerance`, otherwise doubles `t` and
/// extends the same trajectory.
pub fn estimate_mean_queue_with(
    g: &InterferenceGraph,
    tp: &TrafficProfile,
    strategy: &Strategy,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<SimEstimate> {
    let mut sim = Simulator::new(g, tp, strategy, seed, opts.config.clone())?;
    let start = sim.accumulators().clone();
    let mut t = opts.initial_horizon;
    sim.run_until(t)?;
    let mut mid = sim.accumulators().clone();
    let mut doublings = 0;
    loop {
        let status = sim.run_until(2.0 * t)?;
        let end = sim.accumulators();
        let runaway = matches!(status, RunStatus::Runaway { .. });
        let (a1, a2) = if runaway {
            let w = end.window_since(&start);
            (w.mean_total_queue, f64::INFINITY)
        } else {
            (mid.window_since(&start).mean_total_queue, end.window_since(&mid).mean_total_queue)
        };
        let converged = !runaway && relative_gap(a1, a2) < opts.tolerance;
        if converged || runaway || doublings >= opts.max_doublings {
            return Ok(SimEstimate::from_run(
                seed,
                strategy,
                end,
                (a1, a2),
                t,
                converged,
                runaway,
                sim.tagging(),
            ));
        }
        mid = end.clone();
        t *= 2.0;
        doublings += 1;
    }
}

/// Independent replications, run in parallel, returned in seed order.
pub fn replicate(
    g: &InterferenceGraph,
    tp: &TrafficProfile,
    strategy: &Strategy,
    seeds: &[u64],
    opts: &EstimateOptions,
) -> Result<Vec<SimEstimate>> {
    seeds
        .par_iter()
        .map(|&s| estimate_mean_queue_with(g, tp, strategy, s, opts))
        .collect()
}

/// Mean and standard error across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationSummary {
    pub n: usize,
    pub mean: f64,
    /// Zero for a single replication.
    pub std_error: f64,
}

impl ReplicationSummary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n.max(1) as f64;
        let std_error = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, std_error }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, TopologySpec};

    #[test]
    fn horizon_cap() {
        let o = EstimateOptions::default().with_horizon_cap(4e6);
        assert_eq!(o.max_doublings, 2);
        assert_eq!(o.horizon_cap(), 4e6);
        assert_eq!(EstimateOptions::default().horizon_cap(), 64e6);
    }

    #[test]
    fn no_traffic_converges_to_zero() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![2, 2] }).unwrap();
        let tp = TrafficProfile::new(vec![0.0; 4], vec![1.0; 4]).unwrap();
        let opts = EstimateOptions { initial_horizon: 1e3, ..Default::default() };
        let e = estimate_mean_queue_with(&g, &tp, &Strategy::fixed(4, 1.0, 1.0), 1, &opts).unwrap();
        assert!(e.converged && e.mean_total_queue == 0.0);
        assert_eq!(e.horizon_used, 1e3);
    }

    #[test]
    fn mean_is_average_of_halves() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![1] }).unwrap();
        let tp = TrafficProfile::new(vec![0.3], vec![1.0]).unwrap();
        let opts = EstimateOptions { initial_horizon: 1e4, ..Default::default() };
        let e = estimate_mean_queue_with(&g, &tp, &Strategy::fixed(1, 1.0, 1.0), 2, &opts).unwrap();
        let (a, b) = e.half_averages;
        assert!((e.mean_total_queue - (a + b) / 2.0).abs() < 1e-9 * e.mean_total_queue);
        assert!(e.converged);
    }

    #[test]
    fn unstable_run_does_not_converge() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![1] }).unwrap();
        let tp = TrafficProfile::new(vec![0.6], vec![1.0]).unwrap();
        let opts = EstimateOptions { initial_horizon: 1e4, max_doublings: 2, ..Default::default() };
        let e = estimate_mean_queue_with(&g, &tp, &Strategy::fixed(1, 1.0, 1.0), 3, &opts).unwrap();
        assert!(!e.converged && !e.runaway);
        assert_eq!(e.horizon_used, 4e4);
    }

    #[test]
    fn summary() {
        let s = ReplicationSummary::of([1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
