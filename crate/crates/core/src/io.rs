//! `TTF1` binary files and their JSON mirror.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "TTF1"            4 bytes
//! field             u8   (0 real, 1 complex)
//! d                 u32
//! dims[d]           u32 each
//! ranks[d+1]        u32 each
//! cores             f64 each, core k in (r_{k-1}, n_k, r_k) row-major,
//!                   complex entries as (re, im) pairs
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};
use crate::tt::{Core, TensorTrain};

pub const MAGIC: &[u8; 4] = b"TTF1";

/// A train whose field is only known at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensorTrain {
    Real(TensorTrain<f64>),
    Complex(TensorTrain<Complex64>),
}

impl AnyTensorTrain {
    pub fn field(&self) -> Field {
        match self {
            AnyTensorTrain::Real(_) => Field::Real,
            AnyTensorTrain::Complex(_) => Field::Complex,
        }
    }
}

pub fn encode<T: Scalar>(x: &TensorTrain<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * x.storage() * T::FIELD.parts());
    out.extend_from_slice(MAGIC);
    out.push(T::FIELD.tag());
    out.extend_from_slice(&(x.order() as u32).to_le_bytes());
    for n in x.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for r in x.ranks() {
        out.extend_from_slice(&(r as u32).to_le_bytes());
    }
    let mut parts = Vec::with_capacity(2);
    for core in x.cores() {
        for &z in core.data() {
            parts.clear();
            z.write_parts(&mut parts);
            for p in &parts {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Truncated { offset: self.pos, expected: len, actual: self.bytes.len() - self.pos });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

struct Header {
    field: Field,
    dims: Vec<usize>,
    ranks: Vec<usize>,
}

fn read_header(r: &mut Reader) -> Result<Header> {
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format { offset: 0, reason: format!("bad magic {magic:?}") });
    }
    let tag_at = r.pos;
    let tag = r.take(1)?[0];
    let field =
        Field::from_tag(tag).ok_or_else(|| Error::Format { offset: tag_at, reason: format!("unknown field tag {tag}") })?;
    let d_at = r.pos;
    let d = r.u32()?;
    if d == 0 {
        return Err(Error::Format { offset: d_at, reason: "order must be positive".into() });
    }
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        let at = r.pos;
        let n = r.u32()?;
        if n == 0 {
            return Err(Error::Format { offset: at, reason: "mode size must be positive".into() });
        }
        dims.push(n);
    }
    let mut ranks = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        let at = r.pos;
        let rk = r.u32()?;
        if rk == 0 {
            return Err(Error::Format { offset: at, reason: "rank must be positive".into() });
        }
        ranks.push(rk);
    }
    Ok(Header { field, dims, ranks })
}

fn read_cores<T: Scalar>(r: &mut Reader, h: &Header) -> Result<TensorTrain<T>> {
    let parts = T::FIELD.parts();
    let total: usize = (0..h.dims.len()).map(|k| h.ranks[k] * h.dims[k] * h.ranks[k + 1]).sum();
    let need = total * parts * 8;
    if r.bytes.len() - r.pos < need {
        return Err(Error::Truncated { offset: r.pos, expected: need, actual: r.bytes.len() - r.pos });
    }
    let mut cores = Vec::with_capacity(h.dims.len());
    let mut buf = [0.0f64; 2];
    for k in 0..h.dims.len() {
        let len = h.ranks[k] * h.dims[k] * h.ranks[k + 1];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            for slot in buf.iter_mut().take(parts) {
                *slot = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
            }
            data.push(T::read_parts(&buf[..parts]));
        }
        cores.push(Core::new(h.ranks[k], h.dims[k], h.ranks[k + 1], data)?);
    }
    if r.pos != r.bytes.len() {
        return Err(Error::Format {
            offset: r.pos,
            reason: format!("{} trailing bytes after the last core", r.bytes.len() - r.pos),
        });
    }
    TensorTrain::new(cores)
}

/// Decodes a file whose field must match `T`.
pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<TensorTrain<T>> {
    let mut r = Reader { bytes, pos: 0 };
    let h = read_header(&mut r)?;
    if h.field != T::FIELD {
        return Err(Error::FieldMismatch { expected: T::FIELD, found: h.field });
    }
    read_cores(&mut r, &h)
}

pub fn decode_any(bytes: &[u8]) -> Result<AnyTensorTrain> {
    let mut r = Reader { bytes, pos: 0 };
    let h = read_header(&mut r)?;
    Ok(match h.field {
        Field::Real => AnyTensorTrain::Real(read_cores(&mut r, &h)?),
        Field::Complex => AnyTensorTrain::Complex(read_cores(&mut r, &h)?),
    })
}

pub fn save<T: Scalar>(x: &TensorTrain<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(x))?;
    Ok(())
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<TensorTrain<T>> {
    decode(&std::fs::read(path)?)
}

pub fn load_any(path: impl AsRef<Path>) -> Result<AnyTensorTrain> {
    decode_any(&std::fs::read(path)?)
}

/// JSON mirror of a `TTF1` file. Core entries are flattened in the binary
/// order, so conversion in either direction is lossless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtJson {
    pub field: Field,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub cores: Vec<Vec<f64>>,
}

impl TtJson {
    pub fn from_tt<T: Scalar>(x: &TensorTrain<T>) -> Self {
        let cores = x
            .cores()
            .iter()
            .map(|c| {
                let mut v = Vec::with_capacity(c.data().len() * T::FIELD.parts());
                for &z in c.data() {
                    z.write_parts(&mut v);
                }
                v
            })
            .collect();
        TtJson { field: T::FIELD, dims: x.dims(), ranks: x.ranks(), cores }
    }

    pub fn to_tt<T: Scalar>(&self) -> Result<TensorTrain<T>> {
        if self.field != T::FIELD {
            return Err(Error::FieldMismatch { expected: T::FIELD, found: self.field });
        }
        let d = self.dims.len();
        if self.ranks.len() != d + 1 || self.cores.len() != d {
            return Err(Error::DimMismatch(format!(
                "{d} modes with {} ranks and {} cores",
                self.ranks.len(),
                self.cores.len()
            )));
        }
        let parts = T::FIELD.parts();
        let cores = (0..d)
            .map(|k| {
                let data = self.cores[k].chunks(parts).map(T::read_parts).collect();
                Core::new(self.ranks[k], self.dims[k], self.ranks[k + 1], data)
            })
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }

    pub fn to_any(&self) -> Result<AnyTensorTrain> {
        Ok(match self.field {
            Field::Real => AnyTensorTrain::Real(self.to_tt()?),
            Field::Complex => AnyTensorTrain::Complex(self.to_tt()?),
        })
    }

    pub fn from_any(x: &AnyTensorTrain) -> Self {
        match x {
            AnyTensorTrain::Real(t) => TtJson::from_tt(t),
            AnyTensorTrain::Complex(t) => TtJson::from_tt(t),
        }
    }
}

/// One line per core: index, shape and Frobenius norm.
pub fn csv_meta(x: &AnyTensorTrain) -> String {
    fn rows<T: Scalar>(x: &TensorTrain<T>, out: &mut String) {
        for (k, c) in x.cores().iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{},{:e}\n", k + 1, T::FIELD, c.left(), c.n(), c.right(), c.norm()));
        }
    }
    let mut out = String::from("core,field,left_rank,mode_size,right_rank,frobenius_norm\n");
    match x {
        AnyTensorTrain::Real(t) => rows(t, &mut out),
        AnyTensorTrain::Complex(t) => rows(t, &mut out),
    }
    out
}
