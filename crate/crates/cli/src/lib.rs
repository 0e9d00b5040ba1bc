//! Command-line driver for the physcue feature pipeline.
//!
//! Exit codes: 0 on success, 1 when the data cannot be processed, 2 on usage errors.

pub mod args;
pub mod commands;
pub mod error;
pub mod histogram;
pub mod run_manifest;
pub mod svg;

pub use args::{Cli, Command, GlobalArgs};
pub use error::CliError;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Extract(a) => commands::cmd_extract(a, &cli.global).map(drop),
        Command::Assess(a) => commands::cmd_assess(a, &cli.global).map(drop),
        Command::Caption(a) => commands::cmd_caption(a, &cli.global).map(drop),
        Command::Plot(a) => commands::cmd_plot(a, &cli.global).map(drop),
    }
}
