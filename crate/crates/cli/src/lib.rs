//! Batch driver: parses flags and config files, runs one subcommand, and
//! writes CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Cli, RunConfig};
pub use error::CliError;
pub use output::{Report, SPEC_VERSION};

/// Runs the invocation and writes its report; returns the exit status for a
/// run that produced output (1 when a check failed or a regime was violated).
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let run = RunConfig::resolve(cli)?;
    let report = commands::execute(&run)?;
    report.write(run.format, run.out.as_deref())?;
    if let Some(summary) = &report.summary {
        eprintln!("{summary}");
    }
    Ok(if report.failures == 0 { 0 } else { 1 })
}
