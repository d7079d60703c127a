//! Experiment runner and file conversion for `ttstack`.
//!
//! [`run_experiment`] evaluates one experiment pipeline on a parsed
//! [`ExperimentConfig`] and writes `<experiment>.csv` and
//! `<experiment>.summary.json`. Outputs depend only on the config and its
//! seed; grid points run in parallel but are written in grid order.

pub mod config;
pub mod convert;
pub mod experiments;
pub mod output;

use std::path::Path;

use anyhow::{bail, Result};

pub use config::{Experiment, ExperimentConfig};
pub use output::RunOutput;

/// Runs `experiment` and writes its files into `out_dir`.
pub fn run_experiment(experiment: Experiment, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput> {
    if let Some(e) = cfg.experiment {
        if e != experiment {
            bail!("config is for `{}`, not `{}`", e.name(), experiment.name());
        }
    }
    let out = experiments::run(experiment, cfg)?;
    out.write(out_dir)?;
    Ok(out)
}

/// The command-line chapter of the guide in `book/`.
#[doc = include_str!("../../../book/src/cli.md")]
pub mod guide {}
