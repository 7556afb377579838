//! Command line front end: `build-kb`, `build-dataset`, `generate`,
//! `evaluate` and `report`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod models;

use std::ffi::OsString;

use clap::{CommandFactory, FromArgMatches};

pub use args::Cli;
pub use error::CliError;

fn dispatch(argv: Vec<OsString>) -> Result<(), CliError> {
    let cmd = Cli::command();
    let argv = config::merge_config(&cmd, argv)?;
    let matches = cmd.try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    match cli.command {
        args::Command::BuildKb(a) => commands::build_kb(a),
        args::Command::BuildDataset(a) => commands::build_dataset(a),
        args::Command::Generate(a) => commands::generate(a),
        args::Command::Evaluate(a) => commands::evaluate(a),
        args::Command::Report(a) => commands::report(a),
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 for bad flags, 3 for input/output and data errors, 4 for model errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match dispatch(argv.into_iter().map(Into::into).collect()) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
