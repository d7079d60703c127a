//! Conversion between `TTF1` files, their JSON mirror and per-core
//! metadata CSV.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ttstack::io::{csv_meta, decode_any, encode, AnyTensorTrain, TtJson, MAGIC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Ttf1,
    Json,
    CsvMeta,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Ttf1 => "ttf",
            Format::Json => "json",
            Format::CsvMeta => "meta.csv",
        }
    }
}

/// Reads a train from either a `TTF1` file or its JSON mirror, deciding by
/// the leading magic bytes.
pub fn read_any(path: &Path) -> Result<AnyTensorTrain> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(MAGIC) {
        return decode_any(&bytes).with_context(|| format!("decoding {}", path.display()));
    }
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first != Some(&b'{') {
        bail!("{} is neither a TTF1 file nor a JSON train", path.display());
    }
    let j: TtJson = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(j.to_any()?)
}

pub fn render(x: &AnyTensorTrain, to: Format) -> Result<Vec<u8>> {
    Ok(match to {
        Format::Ttf1 => match x {
            AnyTensorTrain::Real(t) => encode(t),
            AnyTensorTrain::Complex(t) => encode(t),
        },
        Format::Json => {
            let mut s = serde_json::to_string(&TtJson::from_any(x))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::CsvMeta => csv_meta(x).into_bytes(),
    })
}

/// Converts `input` and writes the result to `out`, or next to the input
/// with the format's extension. Returns the written path.
pub fn convert(input: &Path, to: Format, out: Option<&Path>) -> Result<PathBuf> {
    let x = read_any(input)?;
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "train".into());
            input.with_file_name(format!("{stem}.{}", to.extension()))
        }
    };
    if target == input {
        bail!("refusing to overwrite the input {}", input.display());
    }
    std::fs::write(&target, render(&x, to)?).with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}
