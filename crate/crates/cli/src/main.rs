//! `cospricer`: COS option prices, strike sweeps, cumulants and error
//! tables from the command line.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 when a numerical
//! routine fails.

mod commands;
mod config;
mod inputs;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use inputs::Flags;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<cospricer::Error> for CliError {
    fn from(e: cospricer::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cospricer", version, about = "European option pricing with Fourier cosine expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Price one option with --method
    Price,
    /// CSV of classic, improved and reference prices over --strikes
    Sweep,
    /// Analytic and numeric cumulants and the truncation ranges they imply
    Cumulants,
    /// CSV of payoff expansion errors or of the price error decomposition
    ErrorAnalysis,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let inputs = cli.flags.resolve()?;
    let text = match cli.command {
        Command::Price => commands::cmd_price(&inputs)?,
        Command::Sweep => commands::cmd_sweep(&inputs)?,
        Command::Cumulants => commands::cmd_cumulants(&inputs)?,
        Command::ErrorAnalysis => commands::cmd_error_analysis(&inputs)?,
    };
    match &inputs.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Numerical(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
