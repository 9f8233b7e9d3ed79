mod cli;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::cli::Cli;
use crate::error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let format = cli.common.format.unwrap_or_else(|| cli.command.default_format());
    let outcome = commands::run(&cli.command, cli.common.seed)?;
    let body = outcome.payload.render(format);
    output::emit(cli, format, &body, started.elapsed())?;
    match outcome.failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sk-landscape: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
