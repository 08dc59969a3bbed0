//! Batch runner behind the command-line tool.

mod config;
mod run;
mod sweep;

use std::path::Path;

use thiserror::Error;

pub use config::{
    parse_values, set_parameter, CheckName, Expectation, HarnessConfig, ModelChoice, Outcome, RunSpec,
};
pub use run::{execute, CheckRecord, RunOutcome, Summary};
pub use sweep::{sweep, SweepRow};

/// Environment variable overriding the config seed.
pub const SEED_ENV: &str = "BLOWUPLAB_SEED";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
}

impl HarnessError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io(format!("{}: {e}", path.display()))
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Seed from [`SEED_ENV`] when set.
pub fn seed_override() -> Result<Option<u64>, HarnessError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| HarnessError::Config(format!("{SEED_ENV}={v:?}: {e}"))),
        Err(_) => Ok(None),
    }
}
