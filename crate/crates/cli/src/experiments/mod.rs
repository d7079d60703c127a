//! Experiment pipelines. Each is a pure function of the config.

/// Runs `$body` with `$t` bound to the scalar type of `$field`.
macro_rules! with_field {
    ($field:expr, $t:ident => $body:expr) => {
        match $field {
            ttstack::Field::Real => {
                type $t = f64;
                $body
            }
            ttstack::Field::Complex => {
                type $t = ttstack::Complex64;
                $body
            }
        }
    };
}

mod eigensolve;
mod embed_quality;
mod gamma_table;
mod hadamard;
mod round_synthetic;
mod verify_moments;

use anyhow::{bail, Result};
use serde_json::{json, Value};
use ttstack::rng::{mix, module};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::RunOutput;

pub use eigensolve::run as eigensolve;
pub use embed_quality::run as embed_quality;
pub use gamma_table::run as gamma_table;
pub use hadamard::run as hadamard;
pub use round_synthetic::run as round_synthetic;
pub use verify_moments::run as verify_moments;

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match experiment {
        Experiment::EmbedQuality => embed_quality(cfg),
        Experiment::RoundSynthetic => round_synthetic(cfg),
        Experiment::Hadamard => hadamard(cfg),
        Experiment::Eigensolve => eigensolve(cfg),
        Experiment::VerifyMoments => verify_moments(cfg),
        Experiment::GammaTable => gamma_table(cfg),
    }
}

/// Seed for one unit of work, derived from the parameters rather than the
/// grid position so that editing a grid leaves other points unchanged.
fn derive(seed: u64, tag: u64, words: &[u64]) -> u64 {
    let mut all = vec![seed, module::EXPERIMENT, tag];
    all.extend_from_slice(words);
    mix(&all)
}

fn check_order(cfg: &ExperimentConfig, d: usize) -> Result<()> {
    if d > cfg.caps.max_order {
        bail!("order {d} exceeds the cap of {}", cfg.caps.max_order);
    }
    Ok(())
}

fn header(name: &str, cfg: &ExperimentConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("experiment".into(), json!(name));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn finish(
    name: &'static str,
    cfg: &ExperimentConfig,
    table: crate::output::Table,
    entries: Vec<Value>,
    extra: Vec<(&str, Value)>,
) -> RunOutput {
    let failures = entries.iter().filter(|e| e.get("error").is_some()).count();
    let mut summary = header(name, cfg);
    for (k, v) in extra {
        summary.insert(k.into(), v);
    }
    summary.insert("points".into(), Value::Array(entries));
    summary.insert("failures".into(), json!(failures));
    RunOutput { experiment: name, table, summary: Value::Object(summary), failures }
}
