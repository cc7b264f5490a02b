mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => commands::build(a),
        Command::Verify(a) => commands::verify(a),
        Command::Attack(a) => commands::attack(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("hidebits: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
