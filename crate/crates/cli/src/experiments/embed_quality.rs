//! Extreme squared singular values of `ΩQ` for a rank-one Kronecker basis.
//!
//! Grid: `d` [10, 20, 40], `n` [4], `r` [16] (basis size), `R` [1, 4, 16,
//! 32], `variants` [tts], `fields` [real], `P` (default `2r/R`), `trials`
//! [100].
//!
//! CSV: `d, n, r, variant, P, R, trial, sigma_min_sq, sigma_max_sq, field`.

use anyhow::{bail, Result};
use serde_json::{json, Value};
use ttstack::analysis::{empirical_spectrum, SpectrumReport, CSV_HEADER};
use ttstack::sketch::{SketchSpec, Variant};
use ttstack::{Field, TensorTrain};

use super::{check_order, derive, finish};
use crate::config::{or_default, ExperimentConfig};
use crate::output::{point_entry, sweep, RunOutput, Spread, Table};

#[derive(Clone, Copy, Debug)]
struct Point {
    d: usize,
    n: usize,
    r: usize,
    variant: Variant,
    p: Option<usize>,
    block_rank: usize,
    field: Field,
}

impl Point {
    fn p(&self) -> Result<usize> {
        match self.p {
            Some(p) => Ok(p),
            None if (2 * self.r) % self.block_rank == 0 => Ok(2 * self.r / self.block_rank),
            None => bail!("R = {} does not divide PR = 2r = {}", self.block_rank, 2 * self.r),
        }
    }

    fn params(&self) -> Value {
        json!({
            "d": self.d, "n": self.n, "r": self.r, "variant": self.variant.name(),
            "P": self.p().ok(), "R": self.block_rank, "field": self.field,
        })
    }
}

fn spectrum(cfg: &ExperimentConfig, pt: &Point, trials: usize) -> Result<SpectrumReport> {
    check_order(cfg, pt.d)?;
    let p = pt.p()?;
    let dims = vec![pt.n; pt.d];
    let sseed = derive(cfg.seed, 2, &[pt.d as u64, pt.n as u64, pt.r as u64, p as u64, pt.block_rank as u64, pt.variant as u64, pt.field.tag() as u64]);
    let spec = SketchSpec::new(pt.variant, p, pt.block_rank, &dims, pt.field, 0);
    with_field!(pt.field, T => {
        let basis = (0..pt.r)
            .map(|j| TensorTrain::<T>::random_kronecker(&dims, derive(cfg.seed, 1, &[pt.d as u64, pt.n as u64, j as u64])))
            .collect::<ttstack::Result<Vec<_>>>()?;
        Ok(empirical_spectrum(&basis, &spec, trials, sseed)?)
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = &cfg.grid;
    let trials = cfg.trials(100);
    let mut points = Vec::new();
    for &d in &or_default(&g.d, &[10, 20, 40]) {
        for &n in &or_default(&g.n, &[4]) {
            for &r in &or_default(&g.r, &[16]) {
                for &variant in &or_default(&g.variants, &[Variant::Tts]) {
                    for p in g.p.clone().map_or(vec![None], |v| v.into_iter().map(Some).collect()) {
                        for &block_rank in &or_default(&g.block_rank, &[1, 4, 16, 32]) {
                            for &field in &or_default(&g.fields, &[Field::Real]) {
                                points.push(Point { d, n, r, variant, p, block_rank, field });
                            }
                        }
                    }
                }
            }
        }
    }
    let results = sweep(&points, |pt| spectrum(cfg, pt, trials));

    let mut header_row: Vec<&str> = CSV_HEADER.to_vec();
    header_row.push("field");
    let mut table = Table::new(&header_row);
    let mut entries = Vec::new();
    for (pt, res) in points.iter().zip(&results) {
        let outcome = match res {
            Ok(rep) => {
                for rec in rep.csv_records() {
                    let mut row = rec.to_vec();
                    row.push(pt.field.to_string());
                    table.push(row);
                }
                Ok(json!({
                    "trials": rep.trials.len(),
                    "sigma_min_sq": Spread::of(&rep.sigma_min_sq()),
                    "sigma_max_sq": Spread::of(&rep.sigma_max_sq()),
                    "gram_condition": rep.basis.gram_condition,
                }))
            }
            Err(e) => Err(e),
        };
        entries.push(point_entry(pt.params(), outcome));
    }
    Ok(finish("embed_quality", cfg, table, entries, vec![]))
}
