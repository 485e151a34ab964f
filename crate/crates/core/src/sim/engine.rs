//! Exponential-race simulation of the joint activity and queue process.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::strategy::Strategy;
use crate::bounds::TrafficProfile;
use crate::error::{Error, Result};
use crate::topology::{ActivityState, InterferenceGraph};

pub const DEFAULT_QUEUE_CAP: u64 = 1_000_000_000;
/// Backlog above which per-packet tagging is abandoned.
pub const TAG_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// A queue exceeding this length stops the run as a runaway.
    pub queue_cap: u64,
    /// Record arrival times for sojourn estimates.
    pub tag_packets: bool,
    /// Record time spent in each activity state.
    pub record_occupancy: bool,
    /// Cliques whose non-serving intervals are measured.
    pub cliques: Vec<Vec<usize>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { queue_cap: DEFAULT_QUEUE_CAP, tag_packets: true, record_occupancy: false, cliques: Vec::new() }
    }
}

/// Current state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub activity: ActivityState,
    /// `L_i`, including any packet in transmission.
    pub queues: Vec<u64>,
    pub clock: f64,
}

/// Time integrals and counters accumulated from time 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Accumulators {
    pub time: f64,
    /// `∫ L_i dt`.
    pub queue_area: Vec<f64>,
    /// `∫ U_i dt`.
    pub active_time: Vec<f64>,
    /// Per clique: time with no clique node transmitting a packet.
    pub nonserving_time: Vec<f64>,
    /// Per clique and clique node: `∫ L_i dt` over non-serving time.
    pub nonserving_area: Vec<Vec<f64>>,
    pub arrivals: Vec<u64>,
    pub departures: Vec<u64>,
    /// Sum and count of sojourn times of departed tagged packets.
    pub sojourn_sum: Vec<f64>,
    pub sojourn_count: Vec<u64>,
    /// Arrivals that ended a dummy transmission.
    pub dummy_preemptions: u64,
    pub events: u64,
    /// Time per activity state, when recorded.
    pub occupancy: HashMap<u64, f64>,
}

impl Accumulators {
    fn new(n: usize, cliques: &[Vec<usize>]) -> Self {
        Self {
            queue_area: vec![0.0; n],
            active_time: vec![0.0; n],
            nonserving_time: vec![0.0; cliques.len()],
            nonserving_area: cliques.iter().map(|c| vec![0.0; c.len()]).collect(),
            arrivals: vec![0; n],
            departures: vec![0; n],
            sojourn_sum: vec![0.0; n],
            sojourn_count: vec![0; n],
            ..Default::default()
        }
    }

    /// Time averages over `[earlier.time, self.time]`.
    pub fn window_since(&self, earlier: &Accumulators) -> WindowStats {
        let dt = self.time - earlier.time;
        let per = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / dt).collect::<Vec<_>>();
        let per_node = per(&self.queue_area, &earlier.queue_area);
        WindowStats {
            length: dt,
            mean_total_queue: per_node.iter().sum(),
            per_node_means: per_node,
            theta_hat: per(&self.active_time, &earlier.active_time),
        }
    }

    /// Time averages over `[0, self.time]`.
    pub fn averages(&self) -> WindowStats {
        let n = self.queue_area.len();
        self.window_since(&Accumulators { queue_area: vec![0.0; n], active_time: vec![0.0; n], ..Default::default() })
    }
}

/// Averages over one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub length: f64,
    pub mean_total_queue: f64,
    pub per_node_means: Vec<f64>,
    pub theta_hat: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A queue passed the cap at `time`.
    Runaway { node: usize, time: f64 },
}

pub struct Simulator {
    neighbors: Vec<u64>,
    lambda: Vec<f64>,
    lambda_total: f64,
    mu: Vec<f64>,
    strategy: Strategy,
    config: SimConfig,
    clique_masks: Vec<u64>,
    state: SimState,
    acc: Accumulators,
    tags: Vec<VecDeque<f64>>,
    tagging: bool,
    race: ChaCha8Rng,
    node_rngs: Vec<ChaCha8Rng>,
    rates: Vec<f64>,
    status: RunStatus,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Simulator {
    /// Starts from the empty, all-inactive state at time 0.
    pub fn new(
        g: &InterferenceGraph,
        tp: &TrafficProfile,
        strategy: &Strategy,
        seed: u64,
        config: SimConfig,
    ) -> Result<Self> {
        let n = g.n_nodes();
        if tp.n_nodes() != n {
            return Err(Error::Domain(format!("traffic profile has {} nodes, graph {n}", tp.n_nodes())));
        }
        strategy.validate(tp)?;
        let mut clique_masks = Vec::with_capacity(config.cliques.len());
        for c in &config.cliques {
            if c.is_empty() || c.iter().any(|&i| i >= n) || !crate::topology::is_clique(g, c) {
                return Err(Error::Domain(format!("{c:?} is not a clique of the graph")));
            }
            clique_masks.push(c.iter().fold(0u64, |m, &i| m | 1 << i));
        }
        Ok(Self {
            neighbors: (0..n).map(|i| g.neighbor_mask(i)).collect(),
            lambda: tp.lambda.clone(),
            lambda_total: tp.lambda.iter().sum(),
            mu: tp.mu.clone(),
            strategy: strategy.clone(),
            acc: Accumulators::new(n, &config.cliques),
            tags: vec![VecDeque::new(); n],
            tagging: config.tag_packets,
            clique_masks,
            config,
            state: SimState { activity: ActivityState(0), queues: vec![0; n], clock: 0.0 },
            // Stream 0 drives the race; node i uses stream i + 1.
            race: stream(seed, 0),
            node_rngs: (0..n as u64).map(|i| stream(seed, i + 1)).collect(),
            rates: vec![0.0; n],
            status: RunStatus::Completed,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn accumulators(&self) -> &Accumulators {
        &self.acc
    }

    pub fn status(&self) -> RunStatus {
        self.status
    }

    /// Whether sojourn tagging is still active.
    pub fn tagging(&self) -> bool {
        self.tagging
    }

    fn integrate(&mut self, dt: f64) {
        let u = self.state.activity.0;
        let acc = &mut self.acc;
        acc.time += dt;
        for (i, &l) in self.state.queues.iter().enumerate() {
            acc.queue_area[i] += dt * l as f64;
            if u >> i & 1 == 1 {
                acc.active_time[i] += dt;
            }
        }
        if !self.clique_masks.is_empty() {
            let serving = self
                .state
                .queues
                .iter()
                .enumerate()
                .filter(|&(i, &l)| l > 0 && u >> i & 1 == 1)
                .fold(0u64, |m, (i, _)| m | 1 << i);
            for (c, &mask) in self.clique_masks.iter().enumerate() {
                if serving & mask == 0 {
                    acc.nonserving_time[c] += dt;
                    for (slot, &i) in self.config.cliques[c].iter().enumerate() {
                        acc.nonserving_area[c][slot] += dt * self.state.queues[i] as f64;
                    }
                }
            }
        }
        if self.config.record_occupancy {
            *acc.occupancy.entry(u).or_insert(0.0) += dt;
        }
    }

    /// Refreshes per-node activity rates and returns their sum.
    fn refresh_rates(&mut self) -> f64 {
        let u = self.state.activity.0;
        let mut total = 0.0;
        for i in 0..self.rates.len() {
            let l = self.state.queues[i];
            self.rates[i] = if u >> i & 1 == 1 {
                self.mu[i]
            } else if u & self.neighbors[i] == 0 && (l > 0 || self.strategy.dummy_packets) {
                self.strategy.rules[i].activation(l)
            } else {
                0.0
            };
            total += self.rates[i];
        }
        total
    }

    /// Advances to `horizon` (absolute time). Stops early on a runaway queue.
    pub fn run_until(&mut self, horizon: f64) -> Result<RunStatus> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon {horizon} must be positive and finite")));
        }
        if let RunStatus::Runaway { .. } = self.status {
            return Ok(self.status);
        }
        while self.state.clock < horizon {
            let total = self.lambda_total + self.refresh_rates();
            if total == 0.0 {
                self.integrate(horizon - self.state.clock);
                self.state.clock = horizon;
                break;
            }
            let wait: f64 = self.race.sample::<f64, _>(Exp1) / total;
            if self.state.clock + wait >= horizon {
                // Memorylessness: the pending event is discarded and resampled.
                self.integrate(horizon - self.state.clock);
                self.state.clock = horizon;
                break;
            }
            self.integrate(wait);
            self.state.clock += wait;
            self.acc.events += 1;
            let mut pick = self.race.random::<f64>() * total;
            if pick < self.lambda_total {
                let i = select(&self.lambda, &mut pick);
                self.arrive(i);
                if self.state.queues[i] > self.config.queue_cap {
                    self.status = RunStatus::Runaway { node: i, time: self.state.clock };
                    return Ok(self.status);
                }
            } else {
                pick -= self.lambda_total;
                let i = select(&self.rates, &mut pick);
                if self.state.activity.is_active(i) {
                    self.complete(i);
                } else {
                    debug_assert_eq!(self.state.activity.0 & self.neighbors[i], 0);
                    self.state.activity = self.state.activity.with(i);
                }
            }
        }
        Ok(self.status)
    }

    fn arrive(&mut self, i: usize) {
        self.acc.arrivals[i] += 1;
        if self.state.queues[i] == 0 && self.state.activity.is_active(i) {
            // A dummy transmission ends and the real packet starts at once.
            // With exponential service the fresh transmission time is the
            // residual of the race, so no timer needs resampling.
            self.acc.dummy_preemptions += 1;
        }
        self.state.queues[i] += 1;
        if self.tagging {
            self.tags[i].push_back(self.state.clock);
            if self.tags[i].len() > TAG_CAP {
                self.tagging = false;
                self.tags.iter_mut().for_each(VecDeque::clear);
            }
        }
    }

    /// Transmission end at active node `i`: departure if the buffer is
    /// non-empty, then release with probability `g(L_i)/μ_i`.
    fn complete(&mut self, i: usize) {
        let l = self.state.queues[i];
        let release = if !self.strategy.dummy_packets && l <= 1 {
            1.0
        } else {
            self.strategy.rules[i].deactivation(l) / self.mu[i]
        };
        if l > 0 {
            self.state.queues[i] = l - 1;
            self.acc.departures[i] += 1;
            if self.tagging {
                if let Some(t) = self.tags[i].pop_front() {
                    self.acc.sojourn_sum[i] += self.state.clock - t;
                    self.acc.sojourn_count[i] += 1;
                }
            }
        }
        if release >= 1.0 || self.node_rngs[i].random::<f64>() < release {
            self.state.activity = self.state.activity.without(i);
        }
    }
}

/// Index of the weight bucket containing `pick`; `pick` is reduced in place.
fn select(weights: &[f64], pick: &mut f64) -> usize {
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if *pick < w {
                return i;
            }
            *pick -= w;
            last = i;
        }
    }
    // Rounding can leave `pick` marginally past the last bucket.
    last
}

/// Summary of one run over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub horizon: f64,
    pub status: RunStatus,
    pub stats: WindowStats,
    pub accumulators: Accumulators,
    pub final_state: SimState,
}

/// One run from the empty system for `horizon` time units.
pub fn simulate(
    g: &InterferenceGraph,
    tp: &TrafficProfile,
    strategy: &Strategy,
    horizon: f64,
    seed: u64,
    config: SimConfig,
) -> Result<Trajectory> {
    let mut sim = Simulator::new(g, tp, strategy, seed, config)?;
    let start = sim.accumulators().clone();
    let status = sim.run_until(horizon)?;
    Ok(Trajectory {
        horizon: sim.state().clock,
        status,
        stats: sim.accumulators().window_since(&start),
        accumulators: sim.acc,
        final_state: sim.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{product_form, FixedRates};
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    fn graph(spec: TopologySpec) -> InterferenceGraph {
        build_topology(&spec).unwrap()
    }

    #[test]
    fn single_node_activity_fraction() {
        let g = graph(TopologySpec::CompletePartite { sizes: vec![1] });
        let tp = TrafficProfile::new(vec![0.3], vec![1.0]).unwrap();
        let t = simulate(&g, &tp, &Strategy::fixed(1, 1.0, 1.0), 1e5, 7, SimConfig::default()).unwrap();
        // θ = σ/(1+σ) = 1/2; the on/off fraction has standard error ≈ 0.0016.
        assert!((t.stats.theta_hat[0] - 0.5).abs() < 3.0 * 0.0016 * 1.5, "{}", t.stats.theta_hat[0]);
        assert_eq!(t.status, RunStatus::Completed);
        assert_eq!(t.horizon, 1e5);
    }

    #[test]
    fn activity_marginal_matches_product_form() {
        let g = graph(TopologySpec::CompletePartite { sizes: vec![2, 2] });
        let tp = TrafficProfile::new(vec![0.0; 4], vec![1.0; 4]).unwrap();
        let rates = FixedRates::new(vec![2.0, 2.0, 0.5, 0.5], vec![1.0; 4]).unwrap();
        let strategy = Strategy::from_fixed_rates(&rates);
        let config = SimConfig { record_occupancy: true, ..SimConfig::default() };
        let t = simulate(&g, &tp, &strategy, 1e6, 3, config).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let dist = product_form(&ss, &rates).unwrap();
        for i in 0..4 {
            assert!((t.stats.theta_hat[i] / dist.theta[i] - 1.0).abs() < 0.01);
        }
        for (idx, u) in ss.states().iter().enumerate() {
            let p = t.accumulators.occupancy.get(&u.0).copied().unwrap_or(0.0) / t.horizon;
            assert!((p - dist.pi[idx]).abs() < 0.01, "{u:?}");
        }
        // Only feasible states were visited.
        assert!(t.accumulators.occupancy.keys().all(|&u| ss.contains(ActivityState(u))));
        assert_eq!(t.stats.mean_total_queue, 0.0);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = graph(TopologySpec::Line { n: 3 });
        let tp = TrafficProfile::new(vec![0.2; 3], vec![1.0; 3]).unwrap();
        let s = Strategy::fixed(3, 2.0, 1.0);
        let a = simulate(&g, &tp, &s, 2e4, 11, SimConfig::default()).unwrap();
        let b = simulate(&g, &tp, &s, 2e4, 11, SimConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = simulate(&g, &tp, &s, 2e4, 12, SimConfig::default()).unwrap();
        assert_ne!(a.stats, c.stats);
    }

    #[test]
    fn always_on_server_is_mm1() {
        let g = graph(TopologySpec::CompletePartite { sizes: vec![1] });
        let tp = TrafficProfile::new(vec![0.5], vec![1.0]).unwrap();
        let s = Strategy::fixed(1, 1e4, 1e-4);
        let t = simulate(&g, &tp, &s, 2e5, 5, SimConfig::default()).unwrap();
        let w = t.accumulators.sojourn_sum[0] / t.accumulators.sojourn_count[0] as f64;
        assert!((w / 2.0 - 1.0).abs() < 0.05, "{w}");
        assert!((t.stats.mean_total_queue - 1.0).abs() < 0.05);
    }

    #[test]
    fn queue_based_without_dummies_never_idles_active() {
        let g = graph(TopologySpec::CompletePartite { sizes: vec![2, 2] });
        let tp = TrafficProfile::new(vec![0.2; 4], vec![1.0; 4]).unwrap();
        let s = Strategy::queue_based(4, super::super::QueueFn::identity(), super::super::QueueFn::constant(1.0));
        let mut sim = Simulator::new(&g, &tp, &s, 1, SimConfig::default()).unwrap();
        for step in 1..=200 {
            sim.run_until(step as f64 * 10.0).unwrap();
            let st = sim.state();
            for i in 0..4 {
                assert!(!(st.activity.is_active(i) && st.queues[i] == 0));
            }
        }
        assert_eq!(sim.accumulators().dummy_preemptions, 0);
    }

    #[test]
    fn runaway_and_domain() {
        let g = graph(TopologySpec::CompletePartite { sizes: vec![1] });
        let tp = TrafficProfile::new(vec![0.9], vec![1.0]).unwrap();
        let config = SimConfig { queue_cap: 50, ..SimConfig::default() };
        let t = simulate(&g, &tp, &Strategy::fixed(1, 0.01, 1.0), 1e6, 1, config).unwrap();
        assert!(matches!(t.status, RunStatus::Runaway { node: 0, .. }));
        assert!(t.horizon < 1e6);
        let err = simulate(&g, &tp, &Strategy::fixed(1, 1.0, 1.0), 0.0, 1, SimConfig::default());
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
