use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use csma_cli::config::ExperimentConfig;
use csma_cli::describe::describe;
use csma_cli::figures::{reproduce, write_reproduction, Figure, Scale};
use csma_cli::run::{run_config, Overrides, Stages};
use csma_cli::{CliError, Result};
use csma_core::topology::{TopologySpec, DEFAULT_STATE_CAP};

#[derive(Parser)]
#[command(name = "csma", version, about = "Analyze and simulate CSMA networks on interference graphs")]
struct Cli {
    /// Worker threads for sweep points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides the configured seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a topology: sizes, cliques, partite structure, ζ and Ω*.
    Describe {
        /// Descriptor such as `complete_partite(5,5)`; or use --config.
        descriptor: Option<String>,
        #[arg(long)]
        topology: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Adjacency list, one line per node.
        #[arg(long)]
        adjacency: bool,
    },
    /// Stationary law, subset flows and lower bounds.
    Analyze(RunArgs),
    /// Doubling-protocol simulation over the load sweep.
    Simulate(RunArgs),
    /// Exact mixing times of the fixed-rate strategies.
    Mixing(RunArgs),
    /// Every analysis enabled in the configuration.
    Run(RunArgs),
    /// Re-create a built-in figure and compare it with the reference data.
    Reproduce {
        /// `fig1` or `fig2`.
        figure: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print a default configuration exercising every section.
    DefaultConfig,
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot configure {n} threads: {e}")))?;
    }
    let run = |args: RunArgs, stages: Stages| -> Result<()> {
        let config = ExperimentConfig::load(&args.config)?;
        let out = run_config(config, stages, &Overrides { out: args.out, seed: args.seed })?;
        for n in &out.notes {
            eprintln!("note: {n}");
        }
        for f in &out.files {
            println!("wrote {}", f.display());
        }
        Ok(())
    };
    match cli.command {
        Command::Describe { descriptor, topology, config, adjacency } => {
            let (text, cap) = match (descriptor.or(topology), config) {
                (Some(t), None) => (t, DEFAULT_STATE_CAP),
                (None, Some(path)) => {
                    let c = ExperimentConfig::load(&path)?;
                    (c.topology.descriptor.clone(), c.caps.states)
                }
                _ => return Err(CliError::Validation("give exactly one of a descriptor or --config".into())),
            };
            let spec: TopologySpec = text.parse()?;
            let d = describe(&spec, cap)?;
            print!("{}", d.render(&spec));
            if adjacency {
                print!("{}", csma_core::topology::build_topology(&spec)?.to_adjacency_text());
            }
            Ok(())
        }
        Command::Analyze(a) => run(a, Stages::ANALYZE),
        Command::Simulate(a) => run(a, Stages::SIMULATE),
        Command::Mixing(a) => run(a, Stages::MIXING),
        Command::Run(a) => run(a, Stages::ALL),
        Command::Reproduce { figure, scale, out, seed } => {
            let fig: Figure = figure.parse()?;
            let scale: Scale = scale.parse()?;
            let rep = reproduce(fig, scale, seed)?;
            for p in write_reproduction(&rep, &out)? {
                println!("wrote {}", p.display());
            }
            for c in rep.comparisons.iter().filter(|c| !c.pass) {
                eprintln!(
                    "deviation: {} ρ = {}: value {} against reference {}{}",
                    c.series,
                    c.rho,
                    c.value,
                    c.reference.map(|r| r.to_string()).unwrap_or_else(|| "diverged".into()),
                    if c.flagged { " (flagged)" } else { "" }
                );
            }
            println!("{}", rep.summary());
            Ok(())
        }
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
