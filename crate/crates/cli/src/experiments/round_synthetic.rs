//! Randomized against deterministic rounding of a rank-`r` signal plus
//! `ε` times rank-10 noise, at fixed embedding dimension `P·R` (no
//! oversampling).
//!
//! Grid: `d` [20], `n` [4], `r` [16] (signal rank), `targets` [16] (`P·R`),
//! `R` [1, 2, 4, 8, 16], `eps` [1e-1, …, 1e-6], `variants` [otts],
//! `fields` [real], `trials` [20]. `R = 1` always uses a Gaussian
//! Khatri-Rao sketch.
//!
//! CSV: `d, n, R, P, variant, eps, trial, rel_error_rand, rel_error_det,
//! field`.

use anyhow::{bail, Result};
use serde_json::{json, Value};
use ttstack::rounding::{rand_round, relative_error, round, signal_plus_noise, Truncation};
use ttstack::sketch::{make_sketch, BaseDistribution, SketchSpec, Variant};
use ttstack::Field;

use super::{check_order, derive, finish};
use crate::config::{or_default, ExperimentConfig};
use crate::output::{fmt_f64, point_entry, sweep, Spread, RunOutput, Table};

pub const NOISE_RANK: usize = 10;

#[derive(Clone, Copy, Debug)]
struct Point {
    d: usize,
    n: usize,
    r: usize,
    target: usize,
    block_rank: usize,
    eps: f64,
    variant: Variant,
    field: Field,
}

impl Point {
    fn spec(&self, seed: u64) -> Result<SketchSpec> {
        let dims = vec![self.n; self.d];
        if self.block_rank == 0 || self.target % self.block_rank != 0 {
            bail!("R = {} does not divide PR = {}", self.block_rank, self.target);
        }
        Ok(if self.block_rank == 1 {
            SketchSpec::khatri_rao(self.target, &dims, self.field, seed, BaseDistribution::Gaussian)
        } else {
            SketchSpec::new(self.variant, self.target / self.block_rank, self.block_rank, &dims, self.field, seed)
        })
    }

    fn params(&self) -> Value {
        json!({
            "d": self.d, "n": self.n, "r": self.r, "PR": self.target, "R": self.block_rank,
            "P": self.target.checked_div(self.block_rank), "eps": self.eps, "variant": self.variant.name(), "field": self.field,
        })
    }
}

/// `(rel_error_rand, rel_error_det)` for one trial. The tensor depends on
/// the trial but not on `R`, so block ranks are compared on the same data.
fn trial(cfg: &ExperimentConfig, pt: &Point, t: usize) -> Result<(f64, f64)> {
    check_order(cfg, pt.d)?;
    let dims = vec![pt.n; pt.d];
    let xseed = derive(cfg.seed, 3, &[pt.d as u64, pt.n as u64, pt.r as u64, pt.eps.to_bits(), t as u64, pt.field.tag() as u64]);
    let sseed = derive(cfg.seed, 4, &[xseed, pt.target as u64, pt.block_rank as u64, pt.variant as u64]);
    let spec = pt.spec(sseed)?;
    with_field!(pt.field, T => {
        let x = signal_plus_noise::<T>(&dims, pt.r, NOISE_RANK, pt.eps, xseed)?;
        let sk = make_sketch::<T>(&spec)?;
        let y = rand_round(&x, &sk)?;
        let z = round(&x, &Truncation::rank(pt.target))?;
        Ok((relative_error(&x, &y)?, relative_error(&x, &z)?))
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = &cfg.grid;
    let trials = cfg.trials(20);
    let mut points = Vec::new();
    for &d in &or_default(&g.d, &[20]) {
        for &n in &or_default(&g.n, &[4]) {
            for &r in &or_default(&g.r, &[16]) {
                for &target in &or_default(&g.targets, &[16]) {
                    for &eps in &or_default(&g.eps, &[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]) {
                        for &block_rank in &or_default(&g.block_rank, &[1, 2, 4, 8, 16]) {
                            for &variant in &or_default(&g.variants, &[Variant::Otts]) {
                                for &field in &or_default(&g.fields, &[Field::Real]) {
                                    points.push(Point { d, n, r, target, block_rank, eps, variant, field });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results = sweep(&jobs, |&(i, t)| trial(cfg, &points[i], t));

    let mut table = Table::new(&[
        "d", "n", "R", "P", "variant", "eps", "trial", "rel_error_rand", "rel_error_det", "field",
    ]);
    let mut entries = Vec::new();
    for (i, pt) in points.iter().enumerate() {
        let mine = &results[i * trials..(i + 1) * trials];
        if let Some(e) = mine.iter().find_map(|r| r.as_ref().err()) {
            entries.push(point_entry(pt.params(), Err(e)));
            continue;
        }
        let spec = pt.spec(0)?;
        let (mut rand, mut det) = (Vec::new(), Vec::new());
        for (t, res) in mine.iter().enumerate() {
            let (a, b) = *res.as_ref().expect("checked above");
            rand.push(a);
            det.push(b);
            table.push(vec![
                pt.d.to_string(),
                pt.n.to_string(),
                pt.block_rank.to_string(),
                spec.p.to_string(),
                spec.variant.name().to_string(),
                fmt_f64(pt.eps),
                t.to_string(),
                fmt_f64(a),
                fmt_f64(b),
                pt.field.to_string(),
            ]);
        }
        let (sr, sd) = (Spread::of(&rand), Spread::of(&det));
        entries.push(point_entry(
            pt.params(),
            Ok(json!({
                "sketch": spec.variant.name(),
                "rel_error_rand": sr,
                "rel_error_det": sd,
                "median_ratio": sr.median / sd.median,
            })),
        ));
    }
    Ok(finish("round_synthetic", cfg, table, entries, vec![("noise_rank", json!(NOISE_RANK))]))
}
