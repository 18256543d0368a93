use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use collisions::experiment::{
    emit_plot_data, load_config, load_results, run_baseline_experiment, run_experiment, run_sweep, ExperimentConfig,
    RunResult,
};
use log::info;
use serde_json::json;

/// Optimize collision-model cavity state preparation with a genetic algorithm.
#[derive(Parser)]
#[command(name = "collide", version)]
struct Cli {
    /// Worker threads for fitness evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA experiment described by a config file.
    Run(RunArgs),
    /// Run the un-optimized baseline stream of a config.
    Baseline(RunArgs),
    /// Sweep the ancilla coherence chi of a coherent-thermal stream.
    SweepChi(RunArgs),
    /// Write plot data for every result found below a directory.
    Plots {
        result_dir: PathBuf,
        /// Destination (default: <result_dir>/plots).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of generations; overrides the config.
    #[arg(long)]
    generations: Option<usize>,
}

impl RunArgs {
    fn load(&self, kind: &str) -> Result<ExperimentConfig> {
        let mut config = load_config(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(g) = self.generations {
            config.ga.generations = Some(g);
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        if config.output.is_none() {
            config.output = Some(default_output(&config, kind));
        }
        Ok(config.resolve()?)
    }
}

fn default_output(config: &ExperimentConfig, kind: &str) -> PathBuf {
    Path::new("results").join(format!("{}_{kind}_seed{}", config.family.name(), config.seed))
}

fn summary(result: &RunResult) -> serde_json::Value {
    json!({
        "family": result.config.family.name(),
        "final_fitness": result.final_fitness,
        "n": result.scenario.n,
        "t_c": result.scenario.t_c,
        "generations": result.trace.len().saturating_sub(1),
        "baseline_fitness": result.baseline.as_ref().map(|b| b.final_fitness),
        "output": result.config.output,
        "wall_clock_s": result.wall_clock_s,
    })
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run(args) => {
            let config = args.load("run")?;
            info!("running {}", args.config.display());
            Ok(summary(&run_experiment(&config)?))
        }
        Command::Baseline(args) => {
            let config = args.load("baseline")?;
            Ok(summary(&run_baseline_experiment(&config)?))
        }
        Command::SweepChi(args) => {
            let config = args.load("sweep")?;
            let sweep = run_sweep(&config)?;
            Ok(json!({
                "chi_bar": sweep.chi_bar,
                "best_distance": sweep.best_distance,
                "points": sweep.curve.len(),
                "output": config.output,
            }))
        }
        Command::Plots { result_dir, out } => {
            let (runs, sweeps) =
                load_results(&result_dir).with_context(|| format!("reading results below {}", result_dir.display()))?;
            let out = out.unwrap_or_else(|| result_dir.join("plots"));
            let files = emit_plot_data(&runs, &sweeps, &out)?;
            Ok(json!({ "runs": runs.len(), "sweeps": sweeps.len(), "files": files }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let kind = err.downcast_ref::<collisions::Error>().map_or("error", |e| e.kind());
            let chain: Vec<String> = err.chain().map(ToString::to_string).collect();
            eprintln!("{}", json!({ "error": kind, "message": err.to_string(), "causes": chain }));
            ExitCode::FAILURE
        }
    }
}
