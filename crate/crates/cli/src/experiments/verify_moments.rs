//! Monte-Carlo checks of the sketch moment formulas.
//!
//! * `matrix_trace_product`, `matrix_hilbert_schmidt`: fourth moments of a
//!   Gaussian `R × n` matrix against their closed forms, for Gaussian `A`
//!   and `B`. Grid `R` [2], `n` [3].
//! * `tensor_moment`: `E[Tr(ΩSΩ*)²]` of one Gaussian TT block against the
//!   γ-weighted partial traces (equality over ℂ, an upper bound over ℝ),
//!   for `trials` [20] random psd `S` per order in `d` [2, 3], mode size
//!   `n`, block rank `R`.
//! * `isotropy`: `E‖Ωx‖² = ‖x‖²` for each of `variants` [tts, gaussian_tt,
//!   khatri_rao] at `d = 5`, `n = 3`.
//!
//! All checks run over `fields` [real, complex] with `samples` [20000]
//! draws, and pass when within 4 standard errors.
//!
//! CSV: `check, field, variant, d, n, R, instance, estimate_re,
//! estimate_im, std_error_re, std_error_im, predicted_re, predicted_im, z,
//! pass`. `z` is the deviation in standard errors, signed for real
//! quantities and the larger component for complex ones.

use anyhow::Result;
use serde_json::{json, Value};
use ttstack::analysis::{
    isotropy_mc, mc_moment_matrix, mc_moment_tensor, random_gaussian_matrix, random_psd, MomentEstimate,
};
use ttstack::sketch::{BaseDistribution, SketchSpec, Variant};
use ttstack::{Complex64, Field, TensorTrain};

use super::{derive, finish};
use crate::config::{or_default, ExperimentConfig};
use crate::output::{fmt_f64, point_entry, sweep, RunOutput, Spread, Table};

pub const SIGMA: f64 = 4.0;
const ISOTROPY_ORDER: usize = 5;
const ISOTROPY_MODE: usize = 3;

#[derive(Clone, Copy, Debug)]
enum Job {
    Matrix { field: Field, r: usize, n: usize },
    Tensor { field: Field, d: usize, n: usize, r: usize, instance: usize },
    Isotropy { field: Field, variant: Variant },
}

/// One CSV row before formatting.
#[derive(Clone, Debug)]
struct Check {
    check: &'static str,
    field: Field,
    variant: String,
    d: usize,
    n: usize,
    r: usize,
    instance: usize,
    estimate: Complex64,
    std_error: Complex64,
    predicted: Complex64,
    z: f64,
    pass: bool,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn signed_z(est: f64, pred: f64, se: f64) -> f64 {
    if est == pred {
        0.0
    } else {
        (est - pred) / se
    }
}

fn isotropy_spec(variant: Variant, field: Field) -> SketchSpec {
    let dims = vec![ISOTROPY_MODE; ISOTROPY_ORDER];
    match variant {
        Variant::KhatriRao => SketchSpec::khatri_rao(4, &dims, field, 0, BaseDistribution::Gaussian),
        Variant::GaussianTt => SketchSpec::new(Variant::GaussianTt, 1, 3, &dims, field, 0),
        v => SketchSpec::new(v, 2, 2, &dims, field, 0),
    }
}

fn evaluate(cfg: &ExperimentConfig, job: &Job, samples: usize) -> Result<Vec<Check>> {
    let base = |check, field, variant: &str, d, n, r, instance| Check {
        check,
        field,
        variant: variant.to_string(),
        d,
        n,
        r,
        instance,
        estimate: real(0.0),
        std_error: real(0.0),
        predicted: real(0.0),
        z: 0.0,
        pass: false,
    };
    let from_moment = |mut c: Check, m: &MomentEstimate| {
        c.estimate = m.estimate;
        c.std_error = m.std_error;
        c.predicted = m.predicted;
        c.z = m.z_score();
        c.pass = m.within(SIGMA);
        c
    };
    match *job {
        Job::Matrix { field, r, n } => with_field!(field, T => {
            let a = random_gaussian_matrix::<T>(n, derive(cfg.seed, 7, &[field.tag() as u64, n as u64, 0]));
            let b = random_gaussian_matrix::<T>(n, derive(cfg.seed, 7, &[field.tag() as u64, n as u64, 1]));
            let seed = derive(cfg.seed, 8, &[field.tag() as u64, r as u64, n as u64]);
            let m = mc_moment_matrix(r, &a, &b, samples, seed)?;
            Ok(vec![
                from_moment(base("matrix_trace_product", field, "", 1, n, r, 0), &m.trace_product),
                from_moment(base("matrix_hilbert_schmidt", field, "", 1, n, r, 0), &m.hilbert_schmidt),
            ])
        }),
        Job::Tensor { field, d, n, r, instance } => with_field!(field, T => {
            let dims = vec![n; d];
            let big_n = n.pow(d as u32);
            let s = random_psd::<T>(big_n, derive(cfg.seed, 9, &[field.tag() as u64, d as u64, n as u64, instance as u64]));
            let seed = derive(cfg.seed, 10, &[field.tag() as u64, d as u64, n as u64, r as u64, instance as u64]);
            let m = mc_moment_tensor(&dims, r, &s, samples, seed)?;
            let mut c = base("tensor_moment", field, "tts", d, n, r, instance);
            c.estimate = real(m.estimate);
            c.std_error = real(m.std_error);
            c.predicted = real(m.predicted);
            c.z = signed_z(m.estimate, m.predicted, m.std_error);
            c.pass = m.consistent(SIGMA);
            Ok(vec![c])
        }),
        Job::Isotropy { field, variant } => with_field!(field, T => {
            let spec = isotropy_spec(variant, field);
            let x = TensorTrain::<T>::random_uniform(&spec.dims, 2, derive(cfg.seed, 11, &[field.tag() as u64]))?;
            let seed = derive(cfg.seed, 12, &[field.tag() as u64, variant as u64]);
            let m = isotropy_mc(&x, &spec, samples, seed)?;
            let mut c = base("isotropy", field, variant.name(), ISOTROPY_ORDER, ISOTROPY_MODE, spec.r.max(), 0);
            c.estimate = real(m.mean);
            c.std_error = real(m.std_error);
            c.predicted = real(m.target);
            c.z = signed_z(m.mean, m.target, m.std_error);
            c.pass = m.within(SIGMA);
            Ok(vec![c])
        }),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = &cfg.grid;
    let samples = cfg.samples(20_000);
    let trials = cfg.trials(20);
    let fields = or_default(&g.fields, &[Field::Real, Field::Complex]);
    let mut jobs = Vec::new();
    for &field in &fields {
        for &r in &or_default(&g.block_rank, &[2]) {
            for &n in &or_default(&g.n, &[3]) {
                jobs.push(Job::Matrix { field, r, n });
            }
        }
    }
    for &field in &fields {
        for &d in &or_default(&g.d, &[2, 3]) {
            for &n in &or_default(&g.n, &[3]) {
                for &r in &or_default(&g.block_rank, &[2]) {
                    for instance in 0..trials {
                        jobs.push(Job::Tensor { field, d, n, r, instance });
                    }
                }
            }
        }
    }
    for &field in &fields {
        for &variant in &or_default(&g.variants, &[Variant::Tts, Variant::GaussianTt, Variant::KhatriRao]) {
            jobs.push(Job::Isotropy { field, variant });
        }
    }
    let results = sweep(&jobs, |j| evaluate(cfg, j, samples));

    let mut table = Table::new(&[
        "check", "field", "variant", "d", "n", "R", "instance", "estimate_re", "estimate_im", "std_error_re",
        "std_error_im", "predicted_re", "predicted_im", "z", "pass",
    ]);
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    for (job, res) in jobs.iter().zip(&results) {
        match res {
            Ok(cs) => checks.extend(cs.iter().cloned()),
            Err(e) => entries.push(point_entry(json!({"job": format!("{job:?}")}), Err(e))),
        }
    }
    for c in &checks {
        table.push(vec![
            c.check.to_string(),
            c.field.to_string(),
            c.variant.clone(),
            c.d.to_string(),
            c.n.to_string(),
            c.r.to_string(),
            c.instance.to_string(),
            fmt_f64(c.estimate.re),
            fmt_f64(c.estimate.im),
            fmt_f64(c.std_error.re),
            fmt_f64(c.std_error.im),
            fmt_f64(c.predicted.re),
            fmt_f64(c.predicted.im),
            fmt_f64(c.z),
            c.pass.to_string(),
        ]);
    }
    // one summary entry per (check, field, d, variant)
    let mut groups: Vec<(&'static str, Field, usize, String)> = Vec::new();
    for c in &checks {
        let key = (c.check, c.field, c.d, c.variant.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (check, field, d, variant) in groups {
        let mine: Vec<&Check> =
            checks.iter().filter(|c| c.check == check && c.field == field && c.d == d && c.variant == variant).collect();
        let z: Vec<f64> = mine.iter().map(|c| c.z).collect();
        let passed = mine.iter().filter(|c| c.pass).count();
        let params = json!({"check": check, "field": field, "d": d, "variant": variant});
        let metrics = json!({"count": mine.len(), "passed": passed, "all_pass": passed == mine.len(), "z": Spread::of(&z)});
        entries.push(point_entry(params, Ok(metrics)));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let extra: Vec<(&str, Value)> =
        vec![("samples", json!(samples)), ("sigma", json!(SIGMA)), ("all_pass", json!(all_pass))];
    Ok(finish("verify_moments", cfg, table, entries, extra))
}
