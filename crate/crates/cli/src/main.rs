//! `ness`: batch driver for the steady-state solver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 config error,
//! 4 infeasible, 5 iteration budget exhausted, 6 oracle size limit.

mod commands;
mod config;
mod error;
mod pipeline;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Overrides;
use config::Builder;

#[derive(Parser, Debug)]
#[command(name = "ness", version, about = "Non-equilibrium steady states of Lindblad models")]
struct Cli {
    /// Repeat for more log output
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one configuration and report diagnostics and observables
    Solve {
        config: PathBuf,
        /// Directory for solution.json and report.csv
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve over a parameter sweep, one CSV row per value and ansatz order
    Sweep {
        config: PathBuf,
        /// CSV file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exact steady states: degeneracy, physical count, seed overlap
    Oracle {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file for the steady-state bases
        #[arg(long)]
        basis: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Separate steady states by symmetry sector
    Symmetry {
        config: PathBuf,
        /// Directory for sectors.csv, overlaps.csv and states.json
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate or inspect ansatz sets
    #[command(subcommand)]
    Ansatz(AnsatzCommand),
    /// Validate or emit model files
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Subcommand, Debug)]
enum AnsatzCommand {
    Generate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    Inspect { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ModelCommand {
    Validate { file: PathBuf },
    Emit {
        #[arg(long, value_enum)]
        builder: Builder,
        #[arg(long = "qubits", short = 'n')]
        n_qubits: usize,
        /// name=value, repeatable
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let value: f64 = value.parse().map_err(|e| format!("{name}: {e}"))?;
    Ok((name.to_string(), value))
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Solve { config, out, overrides } => commands::solve(config, out.as_deref(), overrides),
        Command::Sweep {
            config,
            out,
            threads,
            overrides,
        } => commands::sweep(config, out.as_deref(), overrides, *threads),
        Command::Oracle {
            config,
            out,
            basis,
            overrides,
        } => commands::oracle(config, out.as_deref(), basis.as_deref(), overrides),
        Command::Symmetry { config, out, overrides } => commands::symmetry(config, out, overrides),
        Command::Ansatz(AnsatzCommand::Generate { config, out, overrides }) => {
            commands::ansatz_generate(config, out.as_deref(), overrides)
        }
        Command::Ansatz(AnsatzCommand::Inspect { file }) => commands::ansatz_inspect(file),
        Command::Model(ModelCommand::Validate { file }) => commands::model_validate(file),
        Command::Model(ModelCommand::Emit {
            builder,
            n_qubits,
            params,
            out,
        }) => commands::model_emit(*builder, *n_qubits, params, out.as_ref()),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
