mod args;
mod commands;
mod error;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Detect(a) => commands::detect(a),
        Command::Refine(a) => commands::refine(a),
        Command::Sweep(a) => sweep::sweep(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netcp: {e}");
            ExitCode::from(e.kind.exit_code())
        }
    }
}
