//! `tbic`: generate, solve, evaluate and sweep tensor biclustering runs.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use tensor_bicluster::Error;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Argument(_) | Error::Index { .. } => 2,
        Error::Io(_) | Error::Parse { .. } | Error::Data(_) | Error::Json(_) => 3,
        Error::Numerical { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
