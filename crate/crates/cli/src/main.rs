//! `donlab`: generate operator-learning data, train DeepONets, run scaling
//! experiments, evaluate output-dimension lower bounds and run the numerical
//! verification checks.
//!
//! Exit codes: 0 on success, 1 when a verification or experiment fails, 2 for
//! usage and configuration errors.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenData(a) => commands::gen_data(&cli.global, a),
        Command::Train(a) => commands::train(&cli.global, a),
        Command::Experiment(a) => commands::experiment(&cli.global, a),
        Command::Bound(a) => commands::bound(&cli.global, a),
        Command::Verify(a) => commands::verify(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                CliError::Failed(_) => ExitCode::from(1),
            }
        }
    }
}
