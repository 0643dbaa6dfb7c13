//! `sosps`: generate instances, verify proofs, search for refutations and
//! run batch studies.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 a guaranteed
//! property did not hold.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
