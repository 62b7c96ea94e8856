//! `modent`: command-line front end for the entropy engine.
//!
//! Every run reads one JSON experiment description (see `config.rs` for
//! the schema), writes its artifacts into an output directory together
//! with a hash manifest, and signals the result through the exit code:
//!
//! * 0: run completed and the checked property holds
//! * 1: run completed but a check failed (reports are still written)
//! * 2: configuration error
//! * 3: numerical failure inside the engine
//! * 4: I/O failure
//!
//! Logging goes through `env_logger` on the `MODENT_LOG` variable
//! (`warn` by default; try `MODENT_LOG=info` for per-stage progress).

mod assemble;
mod bundle;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bundle::OutputBundle;
use commands::Outcome;
use config::ExperimentConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "modent", version, about = "Entropy of cuts in symplectic Hilbert spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment description.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for reports and the manifest.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized sweeps; wins over the config's `seed`.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Size of the global worker pool; default uses every core.
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
    /// Numerical tolerance overrides, repeatable.
    #[arg(long = "tol-override", global = true, value_name = "KEY=VAL")]
    tol_override: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check a Gram pair: symmetry, positivity, and the norm bound.
    Validate,
    /// Four-way decomposition and modular data of a subspace.
    Decompose,
    /// Entropy of a probe, optionally compared against a cut.
    Entropy,
    /// Two-parameter table, diagonal entropies, and derivative reports.
    FamilyScan,
    /// Orthogonality of a cut against the entropy form at a later stage.
    DmpCheck,
    /// Monotonicity, concavity, and cross-parameter checks on a table.
    PropertySuite,
    /// Randomized engine-vs-closed-form residual sweeps.
    OracleCompare,
    /// Mesh refinement of the discretized current against the continuum.
    Convergence,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Decompose => "decompose",
            Command::Entropy => "entropy",
            Command::FamilyScan => "family-scan",
            Command::DmpCheck => "dmp-check",
            Command::PropertySuite => "property-suite",
            Command::OracleCompare => "oracle-compare",
            Command::Convergence => "convergence",
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let tol = config.effective_tolerances(&cli.tol_override)?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("modent-out"));
    let mut echo = serde_json::to_value(&config)?;
    if let serde_json::Value::Object(map) = &mut echo {
        map.retain(|_, v| !v.is_null());
    }
    let mut bundle = OutputBundle::new(cli.command.name(), out_dir, echo, seed)?;

    let result = match cli.command {
        Command::Validate => commands::validate(&config, tol, &mut bundle),
        Command::Decompose => commands::decompose(&config, tol, &mut bundle),
        Command::Entropy => commands::entropy(&config, tol, &mut bundle),
        Command::FamilyScan => commands::family_scan(&config, tol, &mut bundle),
        Command::DmpCheck => commands::dmp_check_cmd(&config, tol, &mut bundle),
        Command::PropertySuite => commands::property_suite_cmd(&config, tol, &mut bundle),
        Command::OracleCompare => commands::oracle_compare(&config, tol, seed, &mut bundle),
        Command::Convergence => commands::convergence(&config, tol, &mut bundle),
    };
    match result {
        Ok(outcome) => {
            let manifest = bundle.finish(true)?;
            log::info!("manifest written to {}", manifest.display());
            Ok(outcome)
        }
        Err(err) => {
            // Best effort: leave a manifest marking the run incomplete.
            let _ = bundle.finish(false);
            Err(err)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MODENT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(what)) => {
            eprintln!("check failed: {what}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
