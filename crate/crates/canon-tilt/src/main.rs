//! `canon-tilt`: command-line front end for `canon-core`.
//!
//! Exit codes: 0 on success, 2 when an experiment runs but fails its
//! verdict (the report is still written), 1 on usage, config, IO or
//! computation errors.

mod cli;
mod commands;
mod config;
mod dists;
mod error;
mod exec;
mod report;

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cli::run(std::env::args_os()))
}
