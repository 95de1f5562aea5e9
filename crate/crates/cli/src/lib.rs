//! Command-line front end for `rsn-core`: config loading, run orchestration
//! and output files.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{emit, parse_with_overrides, RunConfig};
use output::{CliError, Manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "rsn", version, about = "Strain-reconfigurable stochastic nanomagnet neurons", after_long_help = config::CONFIG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy landscape E(θ) at each configured stress (landscape.csv, barriers.json).
    Landscape(Common),
    /// Stochastic LLG trajectories (trajectory.csv or trajectory_NNN.csv).
    Simulate(Common),
    /// Regime report, histogram and dwell times for a trajectory CSV.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV; overrides analysis.input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Gate voltage, capacitance, energy and noise margin (reconfig.json).
    ReconfigCost(Common),
    /// Barrier and stress per retention tier; optional barrier equalization.
    RetentionPlan(Common),
    /// p-bit annealing of an Ising problem (anneal.json, trace.csv).
    Anneal(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file (TOML), or a manifest.json from an earlier run to replay it.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. --set simulation.stress="6.5 MPa". Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Overrides run.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides run.output_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for ensembles and restarts (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Landscape(_) => "landscape",
            Command::Simulate(_) => "simulate",
            Command::Analyze { .. } => "analyze",
            Command::ReconfigCost(_) => "reconfig-cost",
            Command::RetentionPlan(_) => "retention-plan",
            Command::Anneal(_) => "anneal",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Landscape(c)
            | Command::Simulate(c)
            | Command::ReconfigCost(c)
            | Command::RetentionPlan(c)
            | Command::Anneal(c) => c,
            Command::Analyze { common, .. } => common,
        }
    }
}

/// Reads the config text, unwrapping a manifest if given one.
fn load_text(path: Option<&Path>) -> Result<(String, PathBuf), CliError> {
    let Some(path) = path else {
        return Ok((String::new(), std::env::current_dir().unwrap_or_default()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))?;
        let config = value
            .get("config")
            .and_then(|c| c.as_str())
            .ok_or_else(|| CliError::Usage(format!("{}: manifest has no `config` string", path.display())))?;
        return Ok((config.to_string(), base));
    }
    Ok((text, base))
}

pub fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let (text, base) = load_text(common.config.as_deref())?;
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    if let Some(out) = &common.out {
        overrides.push(format!("run.output_dir={}", toml::Value::String(out.to_string_lossy().into_owned())));
    }
    Ok(parse_with_overrides(&text, &overrides, &base)?)
}

/// Runs one subcommand and returns its manifest.
pub fn run(cli: &Cli) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let common = cli.command.common();
    let config = load_config(common)?;
    let mut out = OutputDir::create(Path::new(&config.run.output_dir))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let workers = pool.current_num_threads();
    pool.install(|| match &cli.command {
        Command::Landscape(_) => commands::landscape(&config, &mut out),
        Command::Simulate(_) => commands::simulate_cmd(&config, &mut out),
        Command::Analyze { input, .. } => commands::analyze(&config, input.clone(), &mut out),
        Command::ReconfigCost(_) => commands::reconfig_cost(&config, &mut out),
        Command::RetentionPlan(_) => commands::retention_plan(&config, &mut out),
        Command::Anneal(_) => commands::anneal_cmd(&config, &mut out),
    })?;
    let mut manifest = Manifest {
        command: cli.command.name().to_string(),
        version: rsn_core::VERSION.to_string(),
        seed: config.run.seed,
        output_dir: config.run.output_dir.clone(),
        workers,
        wall_time_s: 0.0,
        outputs: out.written().to_vec(),
        config: emit(&config),
    };
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    out.write_text("manifest.json", &format!("{json}\n"))?;
    Ok(manifest)
}
