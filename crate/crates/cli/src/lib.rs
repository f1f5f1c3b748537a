//! Command-line driver for `hubnet`: file formats, run manifests and the
//! `simulate`, `fit`, `preprocess`, `bootstrap` and `eval` commands.

pub mod args;
pub mod commands;
pub mod formats;
pub mod manifest;

use anyhow::Result;

pub use args::{Cli, Command};
pub use commands::UsageError;

/// Runs one parsed command, printing a short summary to stdout.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => {
            commands::simulate(a)?;
            println!("wrote {}", a.out.display());
        }
        Command::Fit(a) => {
            commands::fit(a)?;
            let summary: commands::FitSummary = formats::read_toml(&a.out.join("fit.toml"))?;
            println!(
                "log P(G) = {}  iterations = {}  converged = {}  alpha = {}  beta = {}  gamma = {}",
                summary.log_marginal, summary.iterations, summary.converged, summary.alpha, summary.beta, summary.gamma
            );
        }
        Command::Preprocess(a) => {
            commands::preprocess_records(a)?;
            println!("wrote {}", a.out.display());
        }
        Command::Bootstrap(a) => {
            commands::bootstrap(a)?;
            let s: commands::BootstrapSummary = formats::read_toml(&a.out.join("intervals.toml"))?;
            for (name, i) in [("alpha", &s.alpha), ("beta", &s.beta), ("gamma", &s.gamma)] {
                println!("{name}: {} [{}, {}]", i.point, i.lower, i.upper);
            }
            println!("level {}  failures {}/{}", s.level, s.failures, s.replicates);
        }
        Command::Eval(a) => {
            let r = commands::eval(a)?;
            println!("n = {}", r.n);
            println!("rmse(A) = {}", r.rmse_a);
            println!("|alpha error| = {}", r.alpha_error);
            println!("|beta error| = {}", r.beta_error);
            println!("|gamma error| = {}", r.gamma_error);
        }
    }
    Ok(())
}
