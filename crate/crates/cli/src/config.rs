//! JSON experiment configuration.
//!
//! Every field is optional; missing grid lists fall back to the desk-scale
//! defaults of the chosen experiment. A list that is present must be
//! non-empty. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ttstack::sketch::Variant;
use ttstack::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    EmbedQuality,
    RoundSynthetic,
    Hadamard,
    Eigensolve,
    VerifyMoments,
    GammaTable,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::EmbedQuality,
        Experiment::RoundSynthetic,
        Experiment::Hadamard,
        Experiment::Eigensolve,
        Experiment::VerifyMoments,
        Experiment::GammaTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::EmbedQuality => "embed_quality",
            Experiment::RoundSynthetic => "round_synthetic",
            Experiment::Hadamard => "hadamard",
            Experiment::Eigensolve => "eigensolve",
            Experiment::VerifyMoments => "verify_moments",
            Experiment::GammaTable => "gamma_table",
        }
    }
}

/// Parameter lists swept by the experiments. Which lists an experiment
/// reads is documented on its module.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub d: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
    pub r: Option<Vec<usize>>,
    #[serde(rename = "P")]
    pub p: Option<Vec<usize>>,
    #[serde(rename = "R")]
    pub block_rank: Option<Vec<usize>>,
    pub variants: Option<Vec<Variant>>,
    pub seeds: Option<Vec<u64>>,
    pub trials: Option<usize>,
    pub eps: Option<Vec<f64>>,
    /// Embedding dimensions `P·R` (rounding target ranks).
    pub targets: Option<Vec<usize>>,
    pub fields: Option<Vec<Field>>,
    /// Monte-Carlo sample count.
    pub samples: Option<usize>,
}

impl Grid {
    fn check<T>(name: &str, v: &Option<Vec<T>>) -> Result<()> {
        if matches!(v, Some(v) if v.is_empty()) {
            bail!("grid list `{name}` must be non-empty");
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::check("d", &self.d)?;
        Self::check("n", &self.n)?;
        Self::check("r", &self.r)?;
        Self::check("P", &self.p)?;
        Self::check("R", &self.block_rank)?;
        Self::check("variants", &self.variants)?;
        Self::check("seeds", &self.seeds)?;
        Self::check("eps", &self.eps)?;
        Self::check("targets", &self.targets)?;
        Self::check("fields", &self.fields)?;
        if self.trials == Some(0) {
            bail!("`trials` must be positive");
        }
        if self.samples == Some(0) {
            bail!("`samples` must be positive");
        }
        Ok(())
    }
}

/// Desk-scale limits. Grid points that exceed them are recorded as
/// failures rather than run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub max_trials: usize,
    pub max_samples: usize,
    pub max_order: usize,
    /// Largest chain for which dense oracles are computed.
    pub dense_order: usize,
    /// Record wall-clock times. With `false` the timing column is zero,
    /// which makes every output byte-reproducible.
    pub timing: bool,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_trials: 1000, max_samples: 1_000_000, max_order: 64, dense_order: 12, timing: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Tfim,
    Heisenberg,
}

/// Eigensolver settings. The grid's `seeds` list selects the runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenParams {
    pub model: Model,
    pub d: usize,
    pub ranks: usize,
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub m: usize,
    pub restarts: usize,
    pub variant: Variant,
    /// TFIM couplings.
    pub j: f64,
    pub g: f64,
    /// Heisenberg couplings and field.
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h: f64,
}

impl Default for EigenParams {
    fn default() -> Self {
        EigenParams {
            model: Model::Tfim,
            d: 10,
            ranks: 16,
            p: 4,
            r: 8,
            m: 10,
            restarts: 5,
            variant: Variant::Otts,
            j: 1.0,
            g: 1.5,
            jx: 1.0,
            jy: 1.0,
            jz: 1.0,
            h: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May instead be given on the command line.
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub eigen: EigenParams,
    /// Bits per variable of the Hadamard grid.
    pub bits: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("invalid experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if let Some(t) = self.grid.trials {
            if t > self.caps.max_trials {
                bail!("{t} trials exceed the cap of {}", self.caps.max_trials);
            }
        }
        if let Some(s) = self.grid.samples {
            if s > self.caps.max_samples {
                bail!("{s} samples exceed the cap of {}", self.caps.max_samples);
            }
        }
        if self.bits == Some(0) {
            bail!("`bits` must be positive");
        }
        Ok(())
    }

    pub fn trials(&self, default: usize) -> usize {
        self.grid.trials.unwrap_or(default)
    }

    pub fn samples(&self, default: usize) -> usize {
        self.grid.samples.unwrap_or(default)
    }
}

/// `list` if present, else `default`.
pub fn or_default<T: Clone>(list: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    list.clone().unwrap_or_else(|| default.to_vec())
}
