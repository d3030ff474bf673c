//! `escape-energy` command-line driver.

mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(Failure::USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => commands::estimate(&a),
        Command::Sequence(a) => commands::sequence(&a),
        Command::GammaStudy(a) => commands::gamma_study(&a),
        Command::Oracle(a) => commands::oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("escape-energy: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
