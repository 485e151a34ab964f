//! Executes a configuration and writes its tables.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use csma_core::io::{write_bounds, write_mixing, write_simulations, write_stationary, write_subsets, SimulationRow};
use csma_core::sim::{replicate, EstimateOptions, ReplicationSummary, SimConfig, SimEstimate};

use crate::analysis::{bounds_at, mixing_profiles, mixing_rows, stationary_laws, stationary_rows, subset_rows};
use crate::config::ExperimentConfig;
use crate::results::{write_results, ResultRow};
use crate::scenario::Scenario;
use crate::{CliError, Result};

/// Which analyses a subcommand may run; each also needs its config section enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub stationary: bool,
    pub bounds: bool,
    pub simulation: bool,
    pub mixing: bool,
}

impl Stages {
    pub const ALL: Self = Self { stationary: true, bounds: true, simulation: true, mixing: true };
    pub const ANALYZE: Self = Self { stationary: true, bounds: true, simulation: false, mixing: false };
    pub const SIMULATE: Self = Self { stationary: false, bounds: false, simulation: true, mixing: false };
    pub const MIXING: Self = Self { stationary: false, bounds: false, simulation: false, mixing: true };

    fn restrict(self, c: &ExperimentConfig) -> Self {
        Self {
            stationary: self.stationary && c.stationary.enabled,
            bounds: self.bounds && c.bounds.enabled,
            simulation: self.simulation && c.simulation.enabled,
            mixing: self.mixing && c.mixing.enabled,
        }
    }

    fn any(self) -> bool {
        self.stationary || self.bounds || self.simulation || self.mixing
    }

    fn needs_space(self) -> bool {
        self.stationary || self.bounds || self.mixing
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub files: Vec<PathBuf>,
    /// Skipped bounds and similar remarks.
    pub notes: Vec<String>,
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// `stem.csv` with one fixed strategy, otherwise `stem_<strategy>.csv`.
fn per_strategy(dir: &Path, stem: &str, name: &str, count: usize) -> PathBuf {
    if count == 1 {
        dir.join(format!("{stem}.csv"))
    } else {
        dir.join(format!("{stem}_{}.csv", slug(name)))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

pub fn estimate_options(c: &ExperimentConfig) -> EstimateOptions {
    let s = &c.simulation;
    let opts = EstimateOptions {
        initial_horizon: s.initial_horizon,
        max_doublings: s.max_doublings,
        tolerance: s.tolerance,
        config: SimConfig { queue_cap: c.caps.queue, tag_packets: s.tag_packets, ..SimConfig::default() },
    };
    match s.horizon_cap {
        Some(cap) => opts.with_horizon_cap(cap),
        None => opts,
    }
}

fn seed_provenance(seeds: &[u64]) -> String {
    match seeds {
        [one] => format!("seed={one}"),
        _ if seeds.windows(2).all(|w| w[1] == w[0] + 1) => {
            format!("seeds={}..{}", seeds[0], seeds[seeds.len() - 1])
        }
        _ => format!("seeds={}", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";")),
    }
}

/// Replications for every (ρ, strategy) pair, in sweep then strategy order.
pub fn simulate_sweep(scn: &Scenario, seeds: &[u64]) -> Result<Vec<(f64, usize, Vec<SimEstimate>)>> {
    let opts = estimate_options(&scn.config);
    if !(opts.initial_horizon > 0.0) || !(opts.tolerance > 0.0) {
        return Err(CliError::Validation("simulation.initial_horizon and tolerance must be positive".into()));
    }
    let jobs: Vec<(f64, usize)> =
        scn.sweep.iter().flat_map(|&r| (0..scn.strategies.len()).map(move |j| (r, j))).collect();
    for &(rho, j) in &jobs {
        let tp = scn.traffic(rho)?;
        scn.strategies[j]
            .strategy
            .validate(&tp)
            .map_err(|e| CliError::Validation(format!("strategy {}: {e}", scn.strategies[j].name)))?;
    }
    jobs.par_iter()
        .map(|&(rho, j)| {
            let tp = scn.traffic(rho)?;
            let est = replicate(&scn.graph, &tp, &scn.strategies[j].strategy, seeds, &opts)?;
            Ok((rho, j, est))
        })
        .collect()
}

pub fn simulation_rows(scn: &Scenario, seeds: &[u64], runs: &[(f64, usize, Vec<SimEstimate>)]) -> Vec<ResultRow> {
    let id = &scn.config.scenario;
    let prov = seed_provenance(seeds);
    let mut rows = Vec::new();
    for (rho, j, est) in runs {
        let name = &scn.strategies[*j].name;
        let s = ReplicationSummary::of(est.iter().map(|e| e.mean_total_queue));
        let converged = est.iter().filter(|e| e.converged).count() as f64 / est.len() as f64;
        let runaway = est.iter().any(|e| e.runaway);
        let mut mean = ResultRow::new(id, Some(*rho), format!("sim_mean_total_queue[{name}]"), s.mean, prov.clone());
        mean.vacuous = runaway;
        rows.push(mean);
        rows.push(ResultRow::new(id, Some(*rho), format!("sim_std_error[{name}]"), s.std_error, prov.clone()));
        rows.push(ResultRow::new(id, Some(*rho), format!("sim_converged_fraction[{name}]"), converged, prov.clone()));
    }
    rows
}

/// Runs the enabled analyses of `config` permitted by `stages` and writes
/// `results.csv` plus one table per output kind into the output directory.
pub fn run_config(config: ExperimentConfig, stages: Stages, overrides: &Overrides) -> Result<RunOutput> {
    let stages = stages.restrict(&config);
    if !stages.any() {
        return Err(CliError::Validation(
            "the configuration enables none of the analyses this command runs".into(),
        ));
    }
    let dir = overrides
        .out
        .clone()
        .or_else(|| config.output.dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let scn = Scenario::build(config, stages.needs_space())?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;

    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut notes = Vec::new();
    let n_fixed = scn.fixed().count();

    if stages.stationary && n_fixed == 0 {
        if !(stages.bounds || stages.simulation || stages.mixing) {
            return Err(CliError::Validation("the stationary analysis needs at least one fixed strategy".into()));
        }
        notes.push("stationary analysis skipped: no fixed strategy".into());
    }
    if stages.stationary && n_fixed > 0 {
        let laws = stationary_laws(&scn)?;
        rows.extend(stationary_rows(&scn, &laws)?);
        let ss = scn.space()?;
        for (name, dist) in &laws {
            let path = per_strategy(&dir, "stationary", name, n_fixed);
            write_stationary(create(&path)?, ss, dist)?;
            files.push(path);
            if scn.config.stationary.subsets {
                let subsets = subset_rows(&scn, name, dist)?;
                let path = per_strategy(&dir, "subsets", name, n_fixed);
                write_subsets(create(&path)?, &subsets)?;
                files.push(path);
            }
        }
    }

    if stages.bounds {
        let sets: Vec<_> = scn.sweep.par_iter().map(|&rho| bounds_at(&scn, rho)).collect::<Result<_>>()?;
        let mut reports = Vec::new();
        for set in sets {
            for (tag, r) in &set.reports {
                rows.push(ResultRow::from_bound(&scn.config.scenario, tag.as_deref(), r, set.rho));
                reports.push(r.clone());
            }
            notes.extend(set.notes);
        }
        let path = dir.join("bounds.csv");
        write_bounds(create(&path)?, &reports)?;
        files.push(path);
    }

    if stages.mixing {
        let profiles = mixing_profiles(&scn)?;
        rows.extend(mixing_rows(&scn, &profiles));
        let mut names: Vec<&str> = profiles.iter().map(|(n, _)| n.as_str()).collect();
        names.dedup();
        for name in names {
            let own: Vec<_> = profiles.iter().filter(|(n, _)| n == name).map(|(_, p)| p.clone()).collect();
            let path = per_strategy(&dir, "mixing", name, n_fixed);
            write_mixing(create(&path)?, &own)?;
            files.push(path);
        }
    }

    if stages.simulation {
        let seeds = scn.config.simulation.seed_list(overrides.seed);
        let runs = simulate_sweep(&scn, &seeds)?;
        rows.extend(simulation_rows(&scn, &seeds, &runs));
        let table: Vec<SimulationRow> = runs
            .into_iter()
            .flat_map(|(rho, _, est)| est.into_iter().map(move |estimate| SimulationRow { rho, estimate }))
            .collect();
        let path = dir.join("simulations.csv");
        write_simulations(create(&path)?, &table)?;
        files.push(path);
    }

    let path = dir.join("results.csv");
    write_results(create(&path)?, &rows)?;
    files.insert(0, path);
    Ok(RunOutput { rows, files, notes })
}
