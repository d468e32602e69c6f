//! `qentropy`: batch front end for entropy evaluation, residual checks,
//! classification, limit checks and counterexample search.
//!
//! Exit status: 0 success, 1 expectation not met, 2 usage or input error,
//! 3 inconclusive result under `--strict`.

mod args;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{EXIT_EXPECTATION, EXIT_USAGE};
use config::{CliError, RunConfig};

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let cfg = RunConfig::from_command(&cli.command)?;
    let no_ts = cli.command.args().no_timestamp;
    match &cli.command {
        Command::Eval(_) => commands::eval(&cfg, no_ts),
        Command::Verify(_) => commands::verify(&cfg, no_ts),
        Command::Classify(_) => commands::classify(&cfg, no_ts),
        Command::Limit(_) => commands::limit(&cfg, no_ts),
        Command::Search(_) => commands::search(&cfg, no_ts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let _ = writeln!(std::io::stdout().lock(), "{}", out.text);
            ExitCode::from(out.code as u8)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_EXPECTATION as u8)
        }
    }
}
