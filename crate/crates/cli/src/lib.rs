//! Command line front end: file formats, subcommands and the check suite.

pub mod commands;
pub mod format;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

pub use commands::{execute, Cli, Report, ReportFormat};

/// Exit status when a check or validation fails.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for usage, parse and input errors.
pub const EXIT_ERROR: u8 = 2;

/// Parses `args`, runs the command and writes the report to `out`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = write!(err, "{e}");
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(rep) => {
            let _ = out.write_all(rep.render(cli.report).as_bytes());
            if rep.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
