mod args;
mod commands;
mod config;
mod failure;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::failure::CliError;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            _ => {
                let _ = e.print();
                return CliError::config(e.kind().to_string()).report();
            }
        },
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
