use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use ttsketch::config::Model;
use ttsketch::convert::{convert, Format};
use ttsketch::{run_experiment, Experiment, ExperimentConfig};

/// Exit status when some grid points failed but the sweep completed.
const PARTIAL_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "ttsketch", version, about = "Randomized tensor-train experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; omitted fields take the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config `out`, else `results`].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EigenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    ranks: Option<usize>,
    #[arg(long = "P")]
    p: Option<usize>,
    #[arg(long = "R")]
    r: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embedding spectra of rank-one bases.
    #[command(name = "embed_quality")]
    EmbedQuality(Common),
    /// Randomized against deterministic rounding of signal plus noise.
    #[command(name = "round_synthetic")]
    RoundSynthetic(Common),
    /// Rounding of a product of three QTT functions.
    Hadamard(Common),
    /// Sketched Rayleigh-Ritz on a spin chain.
    Eigensolve(EigenArgs),
    /// Monte-Carlo checks of the moment formulas.
    #[command(name = "verify_moments")]
    VerifyMoments(Common),
    /// Moment coefficient table and sum identity.
    #[command(name = "gamma_table")]
    GammaTable(Common),
    /// Convert a TTF1 or JSON train.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(experiment: Experiment, common: &Common, cfg: ExperimentConfig) -> Result<ExitCode> {
    let dir = common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let out = run_experiment(experiment, &cfg, &dir)?;
    println!("wrote {} and {}", out.csv_path(&dir).display(), out.summary_path(&dir).display());
    if out.failures > 0 {
        eprintln!("{} grid point(s) failed; see the summary", out.failures);
        return Ok(ExitCode::from(PARTIAL_FAILURE));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.cmd {
        Cmd::Convert { file, to, out } => {
            let path = convert(file, *to, out.as_deref())?;
            println!("wrote {}", path.display());
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::Eigensolve(a) => {
            let mut cfg = load(&a.common)?;
            let e = &mut cfg.eigen;
            e.model = a.model.unwrap_or(e.model);
            e.d = a.d.unwrap_or(e.d);
            e.ranks = a.ranks.unwrap_or(e.ranks);
            e.p = a.p.unwrap_or(e.p);
            e.r = a.r.unwrap_or(e.r);
            e.m = a.m.unwrap_or(e.m);
            e.restarts = a.restarts.unwrap_or(e.restarts);
            return execute(Experiment::Eigensolve, &a.common, cfg);
        }
        Cmd::EmbedQuality(c) => (Experiment::EmbedQuality, c),
        Cmd::RoundSynthetic(c) => (Experiment::RoundSynthetic, c),
        Cmd::Hadamard(c) => (Experiment::Hadamard, c),
        Cmd::VerifyMoments(c) => (Experiment::VerifyMoments, c),
        Cmd::GammaTable(c) => (Experiment::GammaTable, c),
    };
    execute(experiment, common, load(common)?)
}
