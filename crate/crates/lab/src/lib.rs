//! Experiment driver around `haarmul-core`: exact-identity verification,
//! inequality audits, norm readouts, corpus sweeps and corpus generation.
//!
//! Every command reads an [`ExperimentConfig`] and writes CSV files whose
//! `#` header embeds that configuration.

pub mod audit;
pub mod config;
pub mod error;
pub mod generate;
pub mod norms;
pub mod output;
pub mod sweep;
pub mod verify;
pub mod weights;

use std::path::PathBuf;

pub use config::{Command, ExperimentConfig, SigmaSpec};
pub use error::{LabError, LabResult};

/// Result of one command: whether every assertion held and what was written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(config: &ExperimentConfig) -> LabResult<Outcome> {
    config.validate()?;
    match config.command {
        Command::Verify => verify::cmd_verify(config),
        Command::Audit => audit::cmd_audit(config),
        Command::Norms => norms::cmd_norms(config),
        Command::Sweep => sweep::cmd_sweep(config),
        Command::Generate => generate::cmd_generate(config),
    }
}
