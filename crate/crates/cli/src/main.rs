//! `aggpilot` command-line runner.

mod output;
mod plot;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aggpilot::ScenarioConfig;

#[derive(Parser, Debug)]
#[command(name = "aggpilot", version, about = "Federated aggregation simulator with an adaptive rule selector")]
struct Cli {
    /// Output root for run directories.
    #[arg(long, global = true, env = "AGGPILOT_OUT", default_value = "runs")]
    out: PathBuf,

    /// Worker threads for client training (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Replace the config's seed; the run label gets a `-seed<N>` suffix.
    #[arg(long, global = true)]
    seed_override: Option<u64>,

    /// Overwrite an existing run directory even if its config differs.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write rounds.csv, summary.json and manifest.json.
    Run { config: PathBuf },
    /// Run one scenario per value of a config key and write comparison.csv.
    Sweep {
        config: PathBuf,
        /// Config key: a JSON path such as `reward.lambda_cost`, or one of the
        /// aliases `lambda`, `beta`, `alpha`, `seed`, `strategy`.
        #[arg(long)]
        key: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Seeds per value, counted up from the config seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Render accuracy curves and rule-selection bars (SVG) for run directories.
    Plot {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Where to write the figures (default: `<out>/plots`).
        #[arg(long)]
        dest: Option<PathBuf>,
    },
}

/// Distinguishes bad input (exit 2) from failures while running (exit 1).
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure::Invalid(e.into())
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub struct Globals {
    pub out: PathBuf,
    pub seed_override: Option<u64>,
    pub force: bool,
}

pub fn load_config(path: &std::path::Path) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(anyhow::anyhow!("{}: {e}", path.display())))
}

/// Parses and validates, applying the seed override.
pub fn finish_config(doc: serde_json::Value, globals: &Globals) -> CliResult<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_json(&doc.to_string()).map_err(Failure::invalid)?;
    if let Some(seed) = globals.seed_override {
        cfg.seed = seed;
        cfg.label = format!("{}-seed{seed}", cfg.label);
        cfg.validate().map_err(Failure::invalid)?;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::invalid(anyhow::anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::runtime)?;
    }
    let globals = Globals {
        out: cli.out,
        seed_override: cli.seed_override,
        force: cli.force,
    };
    match cli.command {
        Command::Run { config } => {
            let cfg = finish_config(load_config(&config)?, &globals)?;
            let summary = output::run_and_write(&cfg, &config, &globals.out, globals.force)?;
            output::print_summaries(&[summary]);
            Ok(())
        }
        Command::Sweep {
            config,
            key,
            values,
            seeds,
        } => sweep::cmd_sweep(&config, &key, &values, seeds, &globals),
        Command::Plot { dirs, dest } => {
            let dest = dest.unwrap_or_else(|| globals.out.join("plots"));
            plot::cmd_plot(&dirs, &dest)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
