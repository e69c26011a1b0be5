//! Command-line front end: simulation campaigns, stationary-state fits,
//! manifold exports, decay analysis, and parameter sweeps.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Job;
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hubbard-boltzmann",
    about = "Matrix-valued Boltzmann solver for the weakly interacting Fermi-Hubbard chain",
    version
)]
struct Cli {
    /// Configuration file (JSON)
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's output_dir)
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Override a configuration key, e.g. --set model.eta=0.5
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads (default: all cores); results are identical either way
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a time-evolution campaign and write observables and snapshots
    Simulate,
    /// Fit the stationary state predicted by the conserved quantities
    Stationary,
    /// Export the collision-manifold geometry and a fixed-k1 slice
    Manifold {
        /// Slice position k1
        #[arg(long, default_value_t = 23.0 / 64.0)]
        slice_k1: f64,
        /// Color manifold samples by the Bloch vector of the collision
        /// kernel at the initial state
        #[arg(long)]
        color: bool,
    },
    /// Fit decay rates from an observables file and a stationary fit
    Analyze {
        /// Observables CSV (default: <out>/observables.csv)
        #[arg(long)]
        observables: Option<PathBuf>,
        /// Stationary fit JSON providing the target entropy
        /// (default: <out>/fit.json)
        #[arg(long)]
        fit: Option<PathBuf>,
        /// Asymptotic fit window "t_lo,t_hi" (default: last 30% of records)
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// Run simulate + stationary + analyze over a list of parameter values
    Sweep {
        /// Dotted configuration key to vary, e.g. model.eta
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected t_lo,t_hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config is required");
            return ExitCode::from(1);
        }
    };
    let config = match Config::load(&config_path, &cli.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let job = match Job::new(config, cli.output.clone()) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(3);
        }
    };

    let result = match &cli.command {
        Command::Simulate => commands::simulate(&job),
        Command::Stationary => commands::stationary(&job),
        Command::Manifold { slice_k1, color } => commands::manifold(&job, *slice_k1, *color),
        Command::Analyze {
            observables,
            fit,
            window,
        } => commands::analyze(&job, observables.clone(), fit.clone(), *window),
        Command::Sweep { param, values } => commands::sweep(&job, param, values),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 = usage/config, 2 = numerical failure, 3 = I/O.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<hubbard_boltzmann::Error>() {
            return match core {
                hubbard_boltzmann::Error::Io(_) => 3,
                hubbard_boltzmann::Error::InvalidConfig(_)
                | hubbard_boltzmann::Error::InvalidModel(_) => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 1;
        }
    }
    2
}
