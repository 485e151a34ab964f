//! CSV writers. Every table has a header row; numbers use the shortest
//! representation that round-trips.

use std::io::Write;

use csv::Writer;

use crate::bounds::BoundReport;
use crate::error::Result;
use crate::sim::SimEstimate;
use crate::stationary::{MixingProfile, StationaryDistribution, SubsetAnalysis};
use crate::topology::StateSpace;

pub const STATIONARY_HEADER: [&str; 2] = ["state_bits", "pi"];
pub const SUBSET_HEADER: [&str; 4] = ["subset_id", "pi_mass", "flow", "bottleneck"];
pub const BOUND_HEADER: [&str; 9] = [
    "bound_kind",
    "target",
    "value",
    "log10_value",
    "vacuous",
    "witness_descriptor",
    "rho",
    "parameters",
    "delay_equivalent",
];
pub const SIMULATION_HEADER: [&str; 10] = [
    "rho",
    "strategy",
    "seed",
    "horizon",
    "mean_total_queue",
    "converged",
    "runaway",
    "first_half",
    "second_half",
    "events",
];
pub const MIXING_HEADER: [&str; 3] = ["epsilon", "t", "d"];

/// Shortest round-trip formatting.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `name=value` pairs joined by `;`.
pub fn parameters(report: &BoundReport) -> String {
    report
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={}", num(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_stationary<W: Write>(w: W, ss: &StateSpace, dist: &StationaryDistribution) -> Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(STATIONARY_HEADER)?;
    for (idx, u) in ss.states().iter().enumerate() {
        out.write_record([u.to_bits(ss.n_nodes()), num(dist.pi[idx])])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_subsets<W: Write>(w: W, rows: &[(String, SubsetAnalysis)]) -> Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(SUBSET_HEADER)?;
    for (id, a) in rows {
        out.write_record([id.clone(), num(a.pi_mass), num(a.flow), num(a.bottleneck)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn bound_record(r: &BoundReport) -> [String; 9] {
    [
        r.kind.as_str().to_string(),
        r.target.as_str().to_string(),
        num(r.value),
        num(r.log10_value),
        r.vacuous.to_string(),
        r.witness.descriptor(),
        num(r.rho),
        parameters(r),
        opt(r.delay_equivalent),
    ]
}

pub fn write_bounds<W: Write>(w: W, reports: &[BoundReport]) -> Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(BOUND_HEADER)?;
    for r in reports {
        out.write_record(bound_record(r))?;
    }
    out.flush()?;
    Ok(())
}

/// One simulated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRow {
    pub rho: f64,
    pub estimate: SimEstimate,
}

pub fn write_simulations<W: Write>(w: W, rows: &[SimulationRow]) -> Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(SIMULATION_HEADER)?;
    for r in rows {
        let e = &r.estimate;
        out.write_record([
            num(r.rho),
            e.strategy.clone(),
            e.seed.to_string(),
            num(e.horizon_used),
            num(e.mean_total_queue),
            e.converged.to_string(),
            e.runaway.to_string(),
            num(e.half_averages.0),
            num(e.half_averages.1),
            e.events.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The `d(t)` curves; the row with `t = t_mix` is included for each profile.
pub fn write_mixing<W: Write>(w: W, profiles: &[MixingProfile]) -> Result<()> {
    let mut out = Writer::from_writer(w);
    out.write_record(MIXING_HEADER)?;
    for p in profiles {
        for &(t, d) in &p.d_curve {
            out.write_record([num(p.epsilon), num(t), num(d)])?;
        }
    }
    out.flush()?;
    Ok(())
}
