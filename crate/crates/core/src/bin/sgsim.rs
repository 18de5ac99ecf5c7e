use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match sgs::cli::run(sgs::cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
