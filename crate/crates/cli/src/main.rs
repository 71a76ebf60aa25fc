mod args;
mod commands;
mod config;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = config::resolve(&cli.command).and_then(|(cfg, out)| commands::run(&cfg, &out));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pgcomp: {e}");
            ExitCode::from(e.code())
        }
    }
}
