//! `varidx`: variation-index analysis, family evaluation, and
//! Gaussian-copula simulation for positive multivariate data.
//!
//! Exit codes: 0 on success, 2 on input or parameter errors, 3 on
//! numeric or feasibility failures. Diagnostics go to standard error.

mod cli;
mod commands;
mod report;

use clap::Parser;

use cli::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let parsed = Cli::parse();
    let outcome = match &parsed.command {
        Command::Analyze(args) => commands::analyze(args),
        Command::Family(args) => commands::family(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Convergence(args) => commands::convergence(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(commands::exit_code_for(&err));
    }
}
