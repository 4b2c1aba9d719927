//! Driver for the `coopscatter` binary: configuration, the subcommands and
//! result tables.
//!
//! Exit codes: 0 success, 2 bad configuration or rejected input, 3 numerical failure
//! or a sweep in which some points failed (the table is still written).

pub mod commands;
pub mod config;
pub mod table;

use std::path::Path;

use config::RunConfig;
use table::ResultTable;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Numeric(#[from] coopscatter::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            // arguments the engine refuses are input errors too
            CliError::Numeric(
                coopscatter::Error::Domain(_)
                | coopscatter::Error::ContractViolation(_)
                | coopscatter::Error::Precondition(_)
                | coopscatter::Error::SizeGuard { .. },
            ) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

/// Write `<out>` (CSV) and `<out>.json` (sidecar with the full config).
pub fn write_outputs(table: &ResultTable, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, table.to_csv())?;
    let mut side = out.as_os_str().to_owned();
    side.push(".json");
    std::fs::write(side, table.sidecar(cfg))?;
    Ok(())
}
