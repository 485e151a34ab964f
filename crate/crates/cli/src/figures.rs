//! The two built-in figure scenarios on `K_{5,5}` and their comparison
//! against digitized reference coordinates.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use csma_core::bounds::{
    sum_over_cover, thm1_concave_f, thm1_h_bound, thm2_symmetric, transversal_clique_cover, BoundKind,
    BoundReport, BoundTarget, RateFamily, TrafficProfile, Witness,
};
use csma_core::io::{num, write_bounds, write_simulations, SimulationRow};
use csma_core::sim::{estimate_mean_queue_with, EstimateOptions, QueueFn, SimConfig, SimEstimate, Strategy};
use csma_core::stationary::{product_form, stability_check, FixedRates};
use csma_core::topology::{
    build_topology, enumerate_state_space, partite_decomposition, InterferenceGraph, PartiteDecomposition,
    TopologySpec,
};

use crate::results::{write_results, ResultRow};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Fixed activation rates `ν ∈ {5, 1, 0.2}` with the aggregate
    /// fixed-rate lower bound.
    Fig1,
    /// `f(x) = x`, `g ≡ 1` with the clique-cover and per-node curves.
    Fig2,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
        }
    }

    fn asset_text(self) -> &'static str {
        match self {
            Figure::Fig1 => include_str!("../assets/fig1.csv"),
            Figure::Fig2 => include_str!("../assets/fig2.csv"),
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            _ => Err(CliError::Validation(format!("unknown figure {s:?}; expected fig1 or fig2"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Every 0.1 of load plus the points where the reference diverges,
    /// horizon cap `4·10^6`, 15% tolerance.
    Desk,
    /// The reference grid with the full doubling protocol, 10% tolerance.
    Full,
}

impl std::str::FromStr for Scale {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(CliError::Validation(format!("unknown scale {s:?}; expected desk or full"))),
        }
    }
}

impl Scale {
    pub fn tolerance(self) -> f64 {
        match self {
            Scale::Desk => 0.15,
            Scale::Full => 0.10,
        }
    }

    pub fn estimate_options(self) -> EstimateOptions {
        let base = EstimateOptions {
            config: SimConfig { tag_packets: false, queue_cap: RUNAWAY_CAP, ..SimConfig::default() },
            ..EstimateOptions::default()
        };
        match self {
            Scale::Desk => base.with_horizon_cap(DESK_HORIZON_CAP),
            Scale::Full => base,
        }
    }
}

pub const DESK_HORIZON_CAP: f64 = 4e6;
/// Relative tolerance for analytic rows.
pub const BOUND_TOLERANCE: f64 = 1e-6;
/// Queue length treated as a runaway in figure runs.
pub const RUNAWAY_CAP: u64 = 10_000_000;

#[derive(Deserialize)]
struct RawPoint {
    series: String,
    kind: String,
    rho: f64,
    value: String,
    diverged: bool,
}

/// One reference coordinate, as printed in the figure's plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub series: String,
    /// `simulation` or `bound`.
    pub kind: String,
    pub rho: f64,
    pub value: f64,
    /// Half a unit in the last printed decimal for fixed-point values, else 0.
    pub resolution: f64,
    /// The reference curve has left the plot (the system is unstable or the
    /// average did not settle); `value` is a sentinel.
    pub diverged: bool,
}

fn resolution(text: &str) -> f64 {
    if text.contains(['e', 'E']) {
        return 0.0;
    }
    match text.split_once('.') {
        Some((_, frac)) => 0.5 * 10f64.powi(-(frac.len() as i32)),
        None => 0.5,
    }
}

pub fn reference(fig: Figure) -> Vec<ReferencePoint> {
    csv::Reader::from_reader(fig.asset_text().as_bytes())
        .deserialize::<RawPoint>()
        .map(|r| {
            let r = r.expect("embedded figure assets parse");
            ReferencePoint {
                value: r.value.parse().expect("numeric reference value"),
                resolution: resolution(&r.value),
                series: r.series,
                kind: r.kind,
                rho: r.rho,
                diverged: r.diverged,
            }
        })
        .collect()
}

/// Within `BOUND_TOLERANCE` relative, or within the printed precision of the
/// reference.
pub fn bound_matches(value: f64, p: &ReferencePoint) -> bool {
    let err = (value - p.value).abs();
    err <= BOUND_TOLERANCE * p.value.abs() || err <= p.resolution
}

/// Network shared by both figures: `K_{5,5}`, `μ ≡ 1`, symmetric split.
pub struct Network {
    pub graph: InterferenceGraph,
    pub decomposition: PartiteDecomposition,
}

impl Network {
    pub fn k55() -> Self {
        let graph = build_topology(&TopologySpec::CompletePartite { sizes: vec![5, 5] }).expect("valid topology");
        let decomposition = partite_decomposition(&graph, None).expect("complete partite");
        Self { graph, decomposition }
    }

    pub fn traffic(&self, rho: f64) -> Result<TrafficProfile> {
        Ok(TrafficProfile::symmetric(&self.decomposition, rho)?)
    }
}

/// Strategy of a simulated series.
pub fn series_strategy(series: &str) -> Option<Strategy> {
    if let Some(nu) = series.strip_prefix("nu=") {
        return nu.parse().ok().map(|nu| Strategy::fixed(10, nu, 1.0));
    }
    (series == "queue_f=x_g=1").then(|| Strategy::queue_based(10, QueueFn::identity(), QueueFn::constant(1.0)))
}

/// Analytic series at `ρ`: the figure's curves plus the unreferenced
/// per-clique and thm1iii rows of the second figure.
pub fn bound_series(net: &Network, fig: Figure, rho: f64) -> Result<Vec<(String, BoundReport)>> {
    let d = &net.decomposition;
    let tp = net.traffic(rho)?;
    let per_node = thm2_symmetric(d, &tp)?;
    Ok(match fig {
        Figure::Fig1 => {
            let n = d.n_nodes() as f64;
            let r = BoundReport::from_log10(
                BoundKind::Thm2,
                BoundTarget::AggregateQueue,
                per_node.log10_value + n.log10(),
                Witness::None,
                rho,
            )
            .with_param("K", 2.0)
            .with_param("M", 5.0)
            .with_param("nodes", n)
            .with_arrivals(tp.lambda.iter().sum());
            vec![("thm2_aggregate".into(), r)]
        }
        Figure::Fig2 => {
            let cover = transversal_clique_cover(d)?;
            let family = RateFamily::Polynomial { a: 1.0, c: 1.0 };
            let xi = vec![1.0; d.n_nodes()];
            let per_clique: Vec<BoundReport> =
                cover.iter().map(|c| thm1_concave_f(&tp, c, &family, &xi)).collect::<csma_core::Result<_>>()?;
            let iii: Vec<BoundReport> =
                cover.iter().map(|c| thm1_h_bound(&tp, c, &family)).collect::<csma_core::Result<_>>()?;
            vec![
                ("thm1i_cover".into(), sum_over_cover(&per_clique)?),
                ("thm1i_per_clique".into(), per_clique[0].clone()),
                ("thm1iii_cover".into(), sum_over_cover(&iii)?),
                ("thm2_per_node".into(), per_node),
            ]
        }
    })
}

fn on_desk_grid(rho: f64) -> bool {
    let x = rho * 10.0;
    (x - x.round()).abs() < 1e-9
}

/// Simulated points of a reproduction: `(series, ρ, reference)`.
pub fn simulation_plan(fig: Figure, scale: Scale) -> Vec<ReferencePoint> {
    reference(fig)
        .into_iter()
        .filter(|p| p.kind == "simulation")
        .filter(|p| scale == Scale::Full || p.diverged || on_desk_grid(p.rho))
        .collect()
}

/// A simulated point with the reasons it was flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPoint {
    pub reference: ReferencePoint,
    pub estimate: SimEstimate,
    /// Fixed rates with `ρ_i ≥ θ_i` for some node.
    pub unstable: bool,
}

impl SimulatedPoint {
    /// Not converged, runaway or unstable.
    pub fn flagged(&self) -> bool {
        !self.estimate.converged || self.estimate.runaway || self.unstable
    }
}

pub fn simulate_point(net: &Network, p: &ReferencePoint, seed: u64, opts: &EstimateOptions) -> Result<SimulatedPoint> {
    let strategy = series_strategy(&p.series)
        .ok_or_else(|| CliError::Validation(format!("no strategy for series {:?}", p.series)))?;
    let tp = net.traffic(p.rho)?;
    let unstable = if strategy.is_fixed() {
        let ss = enumerate_state_space(&net.graph)?;
        let csma_core::sim::NodeRule::Fixed { nu, mu_deact } = strategy.rules[0] else { unreachable!() };
        let dist = product_form(&ss, &FixedRates::new(vec![nu; 10], vec![mu_deact; 10])?)?;
        !stability_check(&dist, &tp.rho)?.stable
    } else {
        false
    };
    let estimate = estimate_mean_queue_with(&net.graph, &tp, &strategy, seed, opts)?;
    Ok(SimulatedPoint { reference: p.clone(), estimate, unstable })
}

/// One line of `comparison.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub series: String,
    pub kind: &'static str,
    pub rho: f64,
    /// `None` when the reference curve diverged.
    pub reference: Option<f64>,
    pub value: f64,
    pub relative_error: Option<f64>,
    pub tolerance: f64,
    pub flagged: bool,
    /// Simulated value at least every non-vacuous bound at the same load.
    pub dominates_bounds: Option<bool>,
    pub pass: bool,
}

pub const COMPARISON_HEADER: [&str; 10] = [
    "series",
    "kind",
    "rho",
    "reference",
    "value",
    "relative_error",
    "tolerance",
    "flagged",
    "dominates_bounds",
    "pass",
];

impl Comparison {
    fn record(&self) -> [String; 10] {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        [
            self.series.clone(),
            self.kind.to_string(),
            num(self.rho),
            self.reference.map(num).unwrap_or_else(|| "diverged".into()),
            num(self.value),
            opt(self.relative_error),
            num(self.tolerance),
            self.flagged.to_string(),
            self.dominates_bounds.map(|b| b.to_string()).unwrap_or_default(),
            self.pass.to_string(),
        ]
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// A reproduction: simulated points, analytic rows and their comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Reproduction {
    pub figure: Figure,
    pub scale: Scale,
    pub simulated: Vec<SimulatedPoint>,
    /// `(ρ, series, report)` at every referenced load.
    pub bounds: Vec<(f64, String, BoundReport)>,
    pub comparisons: Vec<Comparison>,
}

impl Reproduction {
    pub fn summary(&self) -> String {
        let count = |kind: &str| {
            let rows: Vec<_> = self.comparisons.iter().filter(|c| c.kind == kind).collect();
            (rows.iter().filter(|c| c.pass).count(), rows.len())
        };
        let (sp, sn) = count("simulation");
        let (bp, bn) = count("bound");
        let dom = self.comparisons.iter().filter(|c| c.dominates_bounds == Some(false)).count();
        format!(
            "{} {}: {sp}/{sn} simulation rows within {:.0}% (or flagged where the reference diverges), \
             {bp}/{bn} bound rows within {BOUND_TOLERANCE:e}, {dom} simulated rows below a bound",
            self.figure.name(),
            match self.scale {
                Scale::Desk => "desk",
                Scale::Full => "full",
            },
            100.0 * self.scale.tolerance()
        )
    }
}

/// Runs a reproduction. Point `j` of the plan uses seed `seed + j`.
pub fn reproduce(fig: Figure, scale: Scale, seed: u64) -> Result<Reproduction> {
    let net = Network::k55();
    let opts = scale.estimate_options();
    let plan = simulation_plan(fig, scale);
    let simulated: Vec<SimulatedPoint> = plan
        .par_iter()
        .enumerate()
        .map(|(j, p)| simulate_point(&net, p, seed + j as u64, &opts))
        .collect::<Result<_>>()?;

    let refs = reference(fig);
    let mut loads: Vec<f64> = refs.iter().filter(|p| p.kind == "bound").map(|p| p.rho).collect();
    loads.extend(simulated.iter().map(|s| s.reference.rho));
    loads.sort_by(f64::total_cmp);
    loads.dedup();
    let mut bounds = Vec::new();
    for &rho in &loads {
        for (series, r) in bound_series(&net, fig, rho)? {
            bounds.push((rho, series, r));
        }
    }

    let tol = scale.tolerance();
    let mut comparisons = Vec::new();
    for s in &simulated {
        let p = &s.reference;
        let value = s.estimate.mean_total_queue;
        let dominates = (!s.flagged()).then(|| {
            bounds
                .iter()
                .filter(|(rho, _, r)| *rho == p.rho && !r.vacuous && r.target.is_queue())
                .all(|(_, _, r)| value >= r.value)
        });
        let (reference, relative_error, pass) = if p.diverged {
            (None, None, s.flagged())
        } else {
            let e = rel(value, p.value);
            (Some(p.value), Some(e), !s.estimate.runaway && e <= tol)
        };
        comparisons.push(Comparison {
            series: p.series.clone(),
            kind: "simulation",
            rho: p.rho,
            reference,
            value,
            relative_error,
            tolerance: tol,
            flagged: s.flagged(),
            dominates_bounds: dominates,
            pass,
        });
    }
    for p in refs.iter().filter(|p| p.kind == "bound") {
        let r = bounds
            .iter()
            .find(|(rho, series, _)| *rho == p.rho && *series == p.series)
            .map(|(_, _, r)| r)
            .ok_or_else(|| CliError::Validation(format!("no bound series {:?}", p.series)))?;
        let e = rel(r.value, p.value);
        comparisons.push(Comparison {
            series: p.series.clone(),
            kind: "bound",
            rho: p.rho,
            reference: Some(p.value),
            value: r.value,
            relative_error: Some(e),
            tolerance: BOUND_TOLERANCE,
            flagged: false,
            dominates_bounds: None,
            pass: bound_matches(r.value, p),
        });
    }
    Ok(Reproduction { figure: fig, scale, simulated, bounds, comparisons })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

/// Writes `simulations.csv`, `bounds.csv`, `comparison.csv` and `results.csv`.
pub fn write_reproduction(rep: &Reproduction, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let scenario = rep.figure.name();
    let sims: Vec<SimulationRow> = rep
        .simulated
        .iter()
        .map(|s| SimulationRow { rho: s.reference.rho, estimate: s.estimate.clone() })
        .collect();
    let reports: Vec<BoundReport> = rep.bounds.iter().map(|(_, _, r)| r.clone()).collect();

    let mut rows = Vec::new();
    for s in &rep.simulated {
        let e = &s.estimate;
        let mut row = ResultRow::new(
            scenario,
            Some(s.reference.rho),
            format!("sim_mean_total_queue[{}]", s.reference.series),
            e.mean_total_queue,
            format!("seed={}", e.seed),
        );
        row.vacuous = s.flagged();
        rows.push(row);
    }
    for (rho, series, r) in &rep.bounds {
        rows.push(ResultRow::from_bound(scenario, Some(series), r, *rho));
    }

    let paths: Vec<PathBuf> =
        ["results.csv", "simulations.csv", "bounds.csv", "comparison.csv"].iter().map(|f| dir.join(f)).collect();
    write_results(create(&paths[0])?, &rows)?;
    write_simulations(create(&paths[1])?, &sims)?;
    write_bounds(create(&paths[2])?, &reports)?;
    let mut out = csv::Writer::from_writer(create(&paths[3])?);
    out.write_record(COMPARISON_HEADER)?;
    for c in &rep.comparisons {
        out.write_record(c.record())?;
    }
    out.flush()?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assets_parse() {
        let f1 = reference(Figure::Fig1);
        assert_eq!(f1.len(), 260);
        assert_eq!(f1.iter().filter(|p| p.diverged).count(), 3);
        let f2 = reference(Figure::Fig2);
        assert!(f2.iter().any(|p| p.series == "thm1i_cover" && p.rho == 0.5 && p.value == 10.0));
    }

    #[test]
    fn printed_precision() {
        assert_eq!(resolution("0.000011"), 0.5e-6);
        assert_eq!(resolution("8.17e-17"), 0.0);
        assert_eq!(resolution("10"), 0.5);
        let p = &reference(Figure::Fig1)[0];
        assert!(bound_matches(p.value * (1.0 + 1e-7), p));
        assert!(!bound_matches(p.value * 1.01, p));
    }

    #[test]
    fn desk_plan() {
        let plan = simulation_plan(Figure::Fig1, Scale::Desk);
        let nu1: Vec<f64> = plan.iter().filter(|p| p.series == "nu=1").map(|p| p.rho).collect();
        assert_eq!(nu1, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.51]);
        assert!(plan.iter().all(|p| series_strategy(&p.series).is_some()));
    }

    #[test]
    fn bound_rows_match_references() {
        let net = Network::k55();
        for fig in [Figure::Fig1, Figure::Fig2] {
            for p in reference(fig).iter().filter(|p| p.kind == "bound") {
                let rows = bound_series(&net, fig, p.rho).unwrap();
                let r = &rows.iter().find(|(s, _)| *s == p.series).unwrap().1;
                assert!(bound_matches(r.value, p), "{} {}: {} vs {}", p.series, p.rho, r.value, p.value);
            }
        }
    }

    #[test]
    fn per_clique_and_curve_values() {
        let net = Network::k55();
        let rows = bound_series(&net, Figure::Fig2, 0.5).unwrap();
        let get = |s: &str| rows.iter().find(|(n, _)| n == s).unwrap().1.value;
        assert!((get("thm1i_per_clique") - 2.0).abs() < 1e-12);
        assert!((get("thm1i_cover") - 10.0).abs() < 1e-12);
        assert!((get("thm1iii_cover") - 2.5).abs() < 1e-9);
    }
}
