//! Command-line front end: scenario runs, agent-count sweeps, greedy-bound
//! certification, plot emission and config validation.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use searchtrack_harness::archive::{write_archive, write_certify, write_sweep};
use searchtrack_harness::config::{load_config, ScenarioConfig};
use searchtrack_harness::plot::{emit_plots, PlotKind};
use searchtrack_harness::runner::{certify_experiment, run_experiment, sweep_agents, RunMode};

/// Multi-agent search-and-track planning simulator.
#[derive(Parser)]
#[command(name = "searchtrack", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Path to a scenario config file (TOML).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in preset: scenario1..scenario4.
    #[arg(long)]
    scenario: Option<String>,
    /// Override the number of agents.
    #[arg(long)]
    agents: Option<usize>,
}

impl ScenarioArgs {
    fn resolve(&self) -> anyhow::Result<ScenarioConfig> {
        let mut config = match (&self.config, &self.scenario) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => ScenarioConfig::preset(name).ok_or_else(|| {
                anyhow!("unknown scenario preset `{name}` (expected scenario1..scenario4)")
            })?,
            (None, None) => bail!("one of --config or --scenario is required"),
        };
        if let Some(agents) = self.agents {
            config.agents.count = agents;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write a result archive.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated value-function modes: vmo, v1, v2.
        #[arg(long, default_value = "vmo")]
        modes: String,
        /// Monte-Carlo repetitions per mode.
        #[arg(long, default_value_t = 1)]
        mc: u64,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output archive directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat an experiment over a range of team sizes.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated team sizes, e.g. 2,4,6.
        #[arg(long, default_value = "2,4,6")]
        sizes: String,
        #[arg(long, default_value = "vmo")]
        modes: String,
        #[arg(long, default_value_t = 1)]
        mc: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify the greedy planner's optimality ratio against exhaustive
    /// search on seeded mid-run instances.
    Certify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated team sizes to certify.
        #[arg(long, default_value = "2,3")]
        sizes: String,
        /// Instances per team size.
        #[arg(long, default_value_t = 20)]
        mc: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Closed-loop steps executed before each certification.
        #[arg(long, default_value_t = 6)]
        warmup: usize,
        /// Look-ahead horizon during certification.
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw plots from an existing archive.
    Plot {
        /// Archive directory produced by run/sweep/certify.
        #[arg(long)]
        archive: PathBuf,
        /// ratio | trajectories | heatmap | entropy.
        #[arg(long)]
        kind: String,
        /// Output directory for the SVG and data files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a config, echoing the fully resolved settings.
    ValidateConfig {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn parse_sizes(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().context("bad team size"))
        .collect()
}

fn init_workers() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("SEARCHTRACK_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> anyhow::Result<()> {
    init_workers();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            modes,
            mc,
            seed,
            out,
        } => {
            let config = scenario.resolve()?;
            let modes = RunMode::parse_list(&modes)?;
            let archive = run_experiment(&config, &modes, mc, seed)?;
            write_archive(&archive, &out)?;
            println!(
                "wrote archive: {} ({} runs of {} steps)",
                out.display(),
                archive.runs.len(),
                config.time.steps
            );
            for agg in archive.aggregates() {
                println!(
                    "  {:>3}: ospa_dist {:8.3} ± {:6.3}  loc {:7.3}  card {:7.3}  entropy {:.4}",
                    agg.mode.as_str(),
                    agg.ospa_dist.0,
                    agg.ospa_dist.1,
                    agg.ospa_loc.0,
                    agg.ospa_card.0,
                    agg.search_entropy.0
                );
            }
        }
        Command::Sweep {
            scenario,
            sizes,
            modes,
            mc,
            seed,
            out,
        } => {
            let config = scenario.resolve()?;
            let sizes = parse_sizes(&sizes)?;
            let modes = RunMode::parse_list(&modes)?;
            let rows = sweep_agents(&config, &sizes, &modes, mc, seed)?;
            write_sweep(&rows, &out)?;
            println!("wrote sweep table: {}", out.join("sweep.csv").display());
            for row in &rows {
                println!(
                    "  S={:<2} {:>3}: ospa_dist {:8.3} ± {:6.3}",
                    row.agents,
                    row.mode.as_str(),
                    row.ospa_dist_mean,
                    row.ospa_dist_stderr
                );
            }
        }
        Command::Certify {
            scenario,
            sizes,
            mc,
            seed,
            warmup,
            horizon,
            out,
        } => {
            let mut config = scenario.resolve()?;
            config.planner.horizon = horizon;
            let sizes = parse_sizes(&sizes)?;
            let rows = certify_experiment(&config, &sizes, mc, seed, warmup)?;
            write_certify(&rows, &out)?;
            let bound = 1.0 - 1.0 / std::f64::consts::E;
            let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            let optimal = rows.iter().filter(|r| r.ratio >= 1.0 - 1e-9).count();
            println!(
                "certified {} instances: min ratio {:.4} (bound {:.4}), {}/{} at the optimum",
                rows.len(),
                min,
                bound,
                optimal,
                rows.len()
            );
            if min < bound {
                bail!("greedy ratio {min:.4} fell below the 1 - 1/e bound");
            }
        }
        Command::Plot { archive, kind, out } => {
            let kind = PlotKind::parse(&kind).ok_or_else(|| {
                anyhow!("unknown plot kind `{kind}` (ratio | trajectories | heatmap | entropy)")
            })?;
            let written = emit_plots(&archive, kind, &out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::ValidateConfig { scenario } => {
            let config = scenario.resolve()?;
            println!("# resolved configuration (defaults applied)");
            print!("{}", config.to_toml_string());
        }
    }
    Ok(())
}
