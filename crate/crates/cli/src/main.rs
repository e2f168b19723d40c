//! `brownexec`: tape → paths → Brownian-component tests, and
//! tape → parameters → execution simulations.

mod commands;
mod config;
mod manifest;
mod opts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use manifest::Run;
use opts::{BatchOpts, EstimateOpts, PathsOpts, SimulateOpts, SweepOpts, TestRunOpts};

#[derive(Debug, Parser)]
#[command(name = "brownexec", version, about)]
struct Cli {
    /// TOML or JSON file with defaults for the command's options. Keys may sit
    /// at the top level or in a table named after the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a trader's inventory and wealth paths and the simulation grid.
    Paths(PathsOpts),
    /// Truncated realized volatility test on a regular grid.
    TestRegular(TestRunOpts),
    /// Power-variation test on the asynchronous observation times.
    TestAsync(TestRunOpts),
    /// Regular-test p-values over a σ′ × γ grid.
    Sweep(SweepOpts),
    /// Rejection-percentage table over days, traders and symbols.
    Batch(BatchOpts),
    /// Estimate execution-model parameters from a tape.
    Estimate(EstimateOpts),
    /// Monte Carlo of the optimal strategy on a trade grid.
    Simulate(SimulateOpts),
    /// Re-run a command from its manifest.json.
    Replay {
        /// Manifest written by an earlier run.
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Layer the config file under the flags, fill defaults, and return the
/// resolved options in the JSON form recorded by the manifest.
fn resolve<T, F>(file: Option<&Value>, name: &str, args: &T, fill: F) -> anyhow::Result<Value>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce(&mut T),
{
    let mut opts: T = config::merge(file, name, args)?;
    fill(&mut opts);
    Ok(serde_json::to_value(&opts)?)
}

fn seed_of(config: &Value) -> Option<u64> {
    config.get("seed").and_then(Value::as_u64)
}

/// Run `name` with an already resolved configuration.
fn execute(name: &str, config: Value, out_dir: &Path) -> anyhow::Result<()> {
    let mut run = Run::new(out_dir, name, config.clone(), seed_of(&config))?;
    macro_rules! with {
        ($ty:ty, $f:path) => {{
            let opts: $ty = serde_json::from_value(config).context("invalid configuration")?;
            $f(&mut run, &opts)?;
            run.finish(false)?;
            Ok(())
        }};
    }
    match name {
        "paths" => with!(PathsOpts, commands::paths),
        "test-regular" => with!(TestRunOpts, commands::test_regular),
        "test-async" => with!(TestRunOpts, commands::test_async),
        "sweep" => with!(SweepOpts, commands::sweep),
        "estimate" => with!(EstimateOpts, commands::estimate),
        "simulate" => with!(SimulateOpts, commands::simulate_cmd),
        "batch" => {
            let opts: BatchOpts = serde_json::from_value(config).context("invalid configuration")?;
            match commands::batch(&mut run, &opts)? {
                Ok(()) => {
                    run.finish(false)?;
                    Ok(())
                }
                Err(e) => {
                    run.finish(true)?;
                    Err(e.context("batch stopped early; partial results written"))
                }
            }
        }
        other => anyhow::bail!("unknown command `{other}` in manifest"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    let file = file.as_ref();
    let (name, config) = match &cli.command {
        Command::Paths(a) => ("paths", resolve(file, "paths", a, |o| o.tape.fill_defaults())?),
        Command::TestRegular(a) => ("test-regular", resolve(file, "test-regular", a, TestRunOpts::fill_defaults)?),
        Command::TestAsync(a) => ("test-async", resolve(file, "test-async", a, TestRunOpts::fill_defaults)?),
        Command::Sweep(a) => ("sweep", resolve(file, "sweep", a, SweepOpts::fill_defaults)?),
        Command::Batch(a) => ("batch", resolve(file, "batch", a, BatchOpts::fill_defaults)?),
        Command::Estimate(a) => ("estimate", resolve(file, "estimate", a, EstimateOpts::fill_defaults)?),
        Command::Simulate(a) => ("simulate", resolve(file, "simulate", a, SimulateOpts::fill_defaults)?),
        Command::Replay { manifest } => {
            let m = manifest::read(manifest)?;
            let hash = config::config_hash(&m.command, &m.config)?;
            if hash != m.config_hash {
                anyhow::bail!("manifest config hash mismatch: recorded {}, computed {hash}", m.config_hash);
            }
            return execute(&m.command, m.config, &cli.out_dir);
        }
    };
    execute(name, config, &cli.out_dir)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
