//! Dump of the moment coefficients `γ_I` and the sum-identity check.
//!
//! Grid: `d` [10], `R` [4], `fields` [real, complex].
//!
//! CSV: `field, d, R, mask, gamma`, one row per subset, with subsets as
//! bitmasks (bit `k` for mode `k`).

use anyhow::Result;
use serde_json::json;
use ttstack::analysis::GammaTable;
use ttstack::Field;

use super::finish;
use crate::config::{or_default, ExperimentConfig};
use crate::output::{fmt_f64, point_entry, sweep, RunOutput, Table};

/// Relative tolerance of the sum identity.
pub const SUM_TOL: f64 = 1e-12;

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = &cfg.grid;
    let mut points = Vec::new();
    for &field in &or_default(&g.fields, &[Field::Real, Field::Complex]) {
        for &d in &or_default(&g.d, &[10]) {
            for &r in &or_default(&g.block_rank, &[4]) {
                points.push((field, d, r));
            }
        }
    }
    let tables = sweep(&points, |&(field, d, r)| Ok(GammaTable::new(d, r, field)?));

    let mut table = Table::new(&["field", "d", "R", "mask", "gamma"]);
    let mut entries = Vec::new();
    for (&(field, d, r), res) in points.iter().zip(&tables) {
        let params = json!({"field": field, "d": d, "R": r});
        let t = match res {
            Ok(t) => t,
            Err(e) => {
                entries.push(point_entry(params, Err(e)));
                continue;
            }
        };
        for (mask, &gamma) in t.coeffs.iter().enumerate() {
            table.push(vec![field.to_string(), d.to_string(), r.to_string(), mask.to_string(), fmt_f64(gamma)]);
        }
        let (sum, expected) = (t.sum(), t.expected_sum());
        let [empty_recursion, empty_closed, _] = t.empty_values();
        let rel = (sum - expected).abs() / expected;
        let metrics = json!({
            "sum": sum,
            "expected_sum": expected,
            "rel_deviation": rel,
            "sum_identity_holds": rel <= SUM_TOL,
            "gamma_full": t.full(),
            "gamma_full_is_one": t.full() == 1.0,
            "gamma_empty": empty_recursion,
            "gamma_empty_closed_form": empty_closed,
            "support": t.support(),
        });
        entries.push(point_entry(params, Ok(metrics)));
    }
    Ok(finish("gamma_table", cfg, table, entries, vec![("tolerance", json!(SUM_TOL))]))
}
