use std::process::ExitCode;

use clap::Parser;
use hubnet_cli::{run, Cli, UsageError};

fn main() -> ExitCode {
    // clap exits with status 2 on its own for malformed flags
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
