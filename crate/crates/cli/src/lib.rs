//! The `privamp` command line: privacy profiles, amplified bounds, oracle
//! verification, MGFs and plot data, all as CSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 unsupported pairing or numeric-domain error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod error;
pub mod grid;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "privamp", version, about = "Privacy amplification by subsampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate privacy profiles δ(ε).
    Profile(commands::profile::ProfileArgs),
    /// Amplified (ε', δ') for subsampled mechanisms.
    Amplify(commands::amplify::AmplifyArgs),
    /// Check bounds against the exact enumeration oracle.
    Verify(commands::verify::VerifyArgs),
    /// Privacy-loss MGF and Rényi levels from the profile.
    Mgf(commands::mgf::MgfArgs),
    /// Write the plot-data bundles.
    Figures(commands::figures::FiguresArgs),
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Profile(a) => commands::profile::run(a, stdout),
        Command::Amplify(a) => commands::amplify::run(a, stdout),
        Command::Verify(a) => commands::verify::run(a, stdout),
        Command::Mgf(a) => commands::mgf::run(a, stdout),
        Command::Figures(a) => commands::figures::run(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
