//! Command-line front end: reads a TOML run configuration, executes one command and emits a
//! deterministic JSON report.

pub mod cache;
pub mod config;
pub mod error;
pub mod run;

use std::path::Path;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{Command, Report};

/// Runs `cmd` on the configuration text and returns the report. Generator tables are read
/// from and written back to the cache when one is configured.
pub fn execute(cmd: Command, text: &str, depth_override: Option<usize>) -> Result<Report, CliError> {
    let cfg = RunConfig::parse(text)?;
    let mut ctx = run::Context::new(cfg, depth_override)?;
    let (certification, result) = run::run(cmd, &mut ctx)?;
    ctx.persist();
    Ok(Report {
        schema_version: run::SCHEMA_VERSION,
        command: cmd.name(),
        config_hash: run::config_hash(text, depth_override),
        certification,
        result,
    })
}

pub fn execute_file(cmd: Command, path: &Path, depth_override: Option<usize>) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    execute(cmd, &text, depth_override)
}

pub fn render<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
