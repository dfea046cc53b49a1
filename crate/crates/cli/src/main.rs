use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmx::commands::{self, CliError, ExplainMode, ExplainOptions};
use swarmx::config::{self, CampaignSpec};
use swarmx_core::xplain::ForestParams;

#[derive(Parser)]
#[command(name = "swarmx", version, about = "PSO topology campaigns, AOCC statistics and Shapley explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full-factorial campaign and write DIR/runs.csv
    Run {
        /// key = value file; flags given on the command line win
        #[arg(long)]
        config: Option<PathBuf>,
        /// star | ring | vonneumann
        #[arg(long)]
        topology: Option<String>,
        /// Comma-separated function ids (default: all supported)
        #[arg(long)]
        fids: Option<String>,
        #[arg(long)]
        dim: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        instances: Option<String>,
        #[arg(long)]
        runs: Option<String>,
        /// full | reduced
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a runs file into per-function statistics
    Stats {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attribute AOCC to hyperparameters for one function
    Explain {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        fid: u32,
        /// exact | surrogate | both
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        permutations: usize,
    },
    /// Render an attribution file as an SVG swarm plot
    Plot {
        #[arg(long)]
        attributions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("SWARMX_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("SWARMX_WORKERS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, topology, fids, dim, budget, instances, runs, grid, out } => {
            let mut settings = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    config::parse_config(&text)?
                }
                None => BTreeMap::new(),
            };
            let flags = [
                ("topology", topology),
                ("fids", fids),
                ("dim", dim),
                ("budget", budget),
                ("instances", instances),
                ("runs", runs),
                ("grid", grid),
                ("out", out.map(|p| p.display().to_string())),
            ];
            for (key, value) in flags {
                if let Some(v) = value {
                    settings.insert(key.to_string(), v);
                }
            }
            let spec = CampaignSpec::from_settings(&settings)?;
            let workers = workers_from_env()?;
            let summary = commands::cmd_run(&spec, workers)?;
            println!(
                "wrote {} records to {} in {:.2}s",
                summary.records,
                summary.path.display(),
                summary.elapsed.as_secs_f64()
            );
        }
        Command::Stats { runs, out } => {
            let rows = commands::cmd_stats(&runs, &out)?;
            println!("wrote {rows} aggregate rows to {}", out.display());
        }
        Command::Explain { runs, fid, mode, out, trees, max_depth, seed, permutations } => {
            let opts = ExplainOptions {
                mode: mode.parse::<ExplainMode>()?,
                forest: ForestParams { trees, max_depth, seed },
                permutations,
            };
            let result = commands::cmd_explain(&runs, fid, &out, &opts)?;
            println!(
                "wrote {} attribution rows to {} and surrogate report to {}",
                result.rows,
                result.attributions.display(),
                result.surrogate.display()
            );
        }
        Command::Plot { attributions, out } => {
            let n = commands::cmd_plot(&attributions, &out)?;
            println!("plotted {n} points to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swarmx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
