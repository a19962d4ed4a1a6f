//! `aen`: constellations, mutual information, sweeps, gaps to capacity,
//! comparison recipes and a self test. Exit status is 0 on success, 2 on a
//! configuration error and 3 on a runtime or search failure.

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::run::{execute, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
