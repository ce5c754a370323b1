//! Library side of the `seirah` command: configuration, the five workflows
//! and their on-disk outputs. `main.rs` only parses flags and maps errors to
//! exit codes.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{cmd_export_fixtures, cmd_generate, cmd_infer, cmd_simulate, cmd_sweep, Overrides};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, flags or input data. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// I/O or other failure while running. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<seirah_core::Error> for CliError {
    fn from(e: seirah_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}
