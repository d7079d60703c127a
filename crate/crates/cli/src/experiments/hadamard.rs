//! Randomized rounding of the product of three QTT factors, sketched
//! through the factors, against deterministic rounding of the product.
//!
//! Grid: `targets` [10, 20, 30, 40], `R` [1, 2, 5, 10], `trials` [20];
//! `bits` per variable [20]. `R` must divide the target rank.
//!
//! CSV: `target_rank, R, P, trial, rel_error, wall_time_ms`. The
//! deterministic errors are in the summary only.

use anyhow::Result;
use serde_json::{json, Value};
use ttstack::qtt::{build_hadamard_experiment, hadamard_deterministic, hadamard_randomized, HadamardConfig, HadamardTrial};

use super::{derive, finish};
use crate::config::{or_default, ExperimentConfig};
use crate::output::{fmt_f64, point_entry, sweep, RunOutput, Spread, Table};

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = &cfg.grid;
    let trials = cfg.trials(20);
    let hc = HadamardConfig { bits: cfg.bits.unwrap_or(20), ..HadamardConfig::default() };
    let exp = build_hadamard_experiment(hc)?;
    let product = exp.product()?;
    let targets = or_default(&g.targets, &[10, 20, 30, 40]);
    let mut points = Vec::new();
    for &target in &targets {
        for &r in &or_default(&g.block_rank, &[1, 2, 5, 10]) {
            points.push((target, r));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results = sweep(&jobs, |&(i, t)| -> Result<HadamardTrial> {
        let (target, r) = points[i];
        let seed = derive(cfg.seed, 5, &[hc.bits as u64, target as u64, r as u64, t as u64]);
        Ok(hadamard_randomized(&exp, &product, target, r, t, seed)?.1)
    });
    let det = sweep(&targets, |&t| Ok(hadamard_deterministic(&product, t)?.1));

    let mut table = Table::new(&["target_rank", "R", "P", "trial", "rel_error", "wall_time_ms"]);
    let mut entries = Vec::new();
    for (i, &(target, r)) in points.iter().enumerate() {
        let params = json!({"target_rank": target, "R": r});
        let mine = &results[i * trials..(i + 1) * trials];
        if let Some(e) = mine.iter().find_map(|r| r.as_ref().err()) {
            entries.push(point_entry(params, Err(e)));
            continue;
        }
        let rows: Vec<HadamardTrial> = mine.iter().map(|r| *r.as_ref().expect("checked above")).collect();
        for row in &rows {
            let ms = if cfg.caps.timing { row.wall_time_ms } else { 0.0 };
            table.push(vec![
                row.target_rank.to_string(),
                row.r.to_string(),
                row.p.to_string(),
                row.trial.to_string(),
                fmt_f64(row.rel_error),
                fmt_f64(ms),
            ]);
        }
        let errs: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
        let times: Vec<f64> = rows.iter().map(|r| if cfg.caps.timing { r.wall_time_ms } else { 0.0 }).collect();
        let mut metrics = json!({"P": target / r, "rel_error": Spread::of(&errs), "wall_time_ms": Spread::of(&times)});
        if let Some(Ok(d)) = targets.iter().position(|&t| t == target).map(|k| &det[k]) {
            metrics["ratio_to_deterministic"] = json!(Spread::of(&errs).median / d);
        }
        entries.push(point_entry(params, Ok(metrics)));
    }
    let deterministic: Vec<Value> = targets
        .iter()
        .zip(&det)
        .map(|(&t, e)| match e {
            Ok(e) => json!({"target_rank": t, "rel_error": e}),
            Err(msg) => json!({"target_rank": t, "error": msg}),
        })
        .collect();
    let extra = vec![
        ("bits", json!(hc.bits)),
        ("product_max_rank", json!(product.max_rank())),
        ("deterministic", Value::Array(deterministic)),
    ];
    Ok(finish("hadamard", cfg, table, entries, extra))
}
