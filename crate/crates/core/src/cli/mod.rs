//! Command-line front end: config documents, presets, CSV and manifest
//! output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use std::ffi::OsString;
use std::process::ExitCode;

pub use config::{parse_config, parse_config_file, render_config};
pub use presets::{preset, ExperimentPreset};
pub use run::{run_cli, CliError, RunReport};

/// Runs the CLI and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_cli(args) {
        Ok(report) => {
            for file in &report.files {
                log::info!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
