mod args;
mod commands;
mod data;
mod tables;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 64;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 1;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::ValidateModel(a) => commands::validate_model(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Test(a) => commands::test(a),
        Command::ReproduceTable1(a) => commands::reproduce_table1(a),
        Command::ReproduceTable2(a) => commands::reproduce_table2(a),
        Command::ReproduceFigures(a) => commands::reproduce_figures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
