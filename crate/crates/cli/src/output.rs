//! CSV tables, JSON summaries and the grid sweep driver.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use ttstack::analysis::stats::{iqr, median};

/// Floats are written in shortest round-trip exponent form, so values
/// parsed back from the CSV are bit-identical to the ones summarized.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Median and interquartile range of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        let (q25, q75) = iqr(values);
        Spread { median: median(values), q25, q75 }
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub experiment: &'static str,
    pub table: Table,
    pub summary: Value,
    /// Grid points that failed.
    pub failures: usize,
}

impl RunOutput {
    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.experiment))
    }

    pub fn summary_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.summary.json", self.experiment))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        self.table.write(&self.csv_path(dir))?;
        let mut text = serde_json::to_string_pretty(&self.summary)?;
        text.push('\n');
        let path = self.summary_path(dir);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Runs `f` on every grid point in parallel and returns the outcomes in
/// grid order. Errors are kept as strings so one bad point does not abort
/// the sweep.
pub fn sweep<P, R, F>(points: &[P], f: F) -> Vec<std::result::Result<R, String>>
where
    P: Sync,
    R: Send,
    F: Fn(&P) -> Result<R> + Sync,
{
    points.par_iter().map(|p| f(p).map_err(|e| format!("{e:#}"))).collect()
}

/// One summary entry: the point's parameters, then either its metrics or
/// its error.
pub fn point_entry(params: Value, outcome: std::result::Result<Value, &String>) -> Value {
    let mut obj = match params {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("params".into(), other);
            m
        }
    };
    match outcome {
        Ok(Value::Object(metrics)) => obj.extend(metrics),
        Ok(v) => {
            obj.insert("result".into(), v);
        }
        Err(e) => {
            obj.insert("error".into(), Value::String(e.clone()));
        }
    }
    Value::Object(obj)
}
