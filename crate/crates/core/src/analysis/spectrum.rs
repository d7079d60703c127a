use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::median;
use crate::contract::sketch_apply;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues};
use crate::rng::{mix, module};
use crate::scalar::Scalar;
use crate::sketch::{make_sketch, SketchSpec};
use crate::tt::{inner, norm, TensorTrain};

/// Bases whose normalized Gram matrix is worse conditioned than this are
/// rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisInfo {
    pub dims: Vec<usize>,
    /// Number of basis vectors.
    pub r: usize,
    /// Largest TT rank among the basis vectors.
    pub basis_rank: usize,
    pub gram_condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub trial: usize,
    pub sigma_min_sq: f64,
    pub sigma_max_sq: f64,
}

/// Extreme squared singular values of `ΩQ` over independent sketch draws,
/// where `Q` is an orthonormal basis of the span of the given trains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub basis: BasisInfo,
    pub spec: SketchSpec,
    pub trials: Vec<SpectrumRow>,
}

pub const CSV_HEADER: [&str; 9] = ["d", "n", "r", "variant", "P", "R", "trial", "sigma_min_sq", "sigma_max_sq"];

impl SpectrumReport {
    pub fn sigma_min_sq(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.sigma_min_sq).collect()
    }

    pub fn sigma_max_sq(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.sigma_max_sq).collect()
    }

    pub fn median_min(&self) -> f64 {
        median(&self.sigma_min_sq())
    }

    pub fn median_max(&self) -> f64 {
        median(&self.sigma_max_sq())
    }

    /// One record per trial, in [`CSV_HEADER`] order.
    pub fn csv_records(&self) -> Vec<[String; 9]> {
        let d = self.basis.dims.len();
        let n = self.basis.dims.first().copied().unwrap_or(0);
        self.trials
            .iter()
            .map(|t| {
                [
                    d.to_string(),
                    n.to_string(),
                    self.basis.r.to_string(),
                    self.spec.variant.name().to_string(),
                    self.spec.p.to_string(),
                    self.spec.r.max().to_string(),
                    t.trial.to_string(),
                    format!("{:e}", t.sigma_min_sq),
                    format!("{:e}", t.sigma_max_sq),
                ]
            })
            .collect()
    }
}

/// Whitening factor `G^{-1/2}` of the Gram matrix of `basis`, after
/// normalizing every vector.
fn whitening<T: Scalar>(basis: &[TensorTrain<T>]) -> Result<(Vec<TensorTrain<T>>, DMatrix<T>, f64)> {
    let unit: Vec<TensorTrain<T>> = basis
        .iter()
        .map(|v| {
            let nv = norm(v);
            if nv == 0.0 {
                return Err(Error::InvalidArgument("zero vector in basis".into()));
            }
            Ok(v.clone().scaled(T::from_re(1.0 / nv)))
        })
        .collect::<Result<_>>()?;
    let r = unit.len();
    let mut g = DMatrix::<T>::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let v = inner(&unit[i], &unit[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v.conjugate();
        }
    }
    let (vals, vecs) = hermitian_eig(&g);
    let cond = if vals[0] > 0.0 { vals[r - 1] / vals[0] } else { f64::INFINITY };
    if cond > MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned { cond, limit: MAX_GRAM_CONDITION });
    }
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let mut c = scaled.column_mut(j);
        c *= T::from_re(1.0 / l.sqrt());
    }
    Ok((unit, scaled * vecs.adjoint(), cond))
}

/// Squared extreme singular values of `ΩQ`, for one draw of `Ω` per trial
/// (the seed of `spec` is replaced by a per-trial seed derived from
/// `seed`). Nothing is densified: each trial sketches the basis vectors
/// through partial contractions and whitens with the Gram matrix.
pub fn empirical_spectrum<T: Scalar>(
    basis: &[TensorTrain<T>],
    spec: &SketchSpec,
    trials: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let dims = basis[0].dims();
    if basis.iter().any(|v| v.dims() != dims) || spec.dims != dims {
        return Err(Error::DimMismatch("basis and sketch must share mode sizes".into()));
    }
    let (unit, w, cond) = whitening(basis)?;
    let rows: Vec<SpectrumRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = SketchSpec { seed: mix(&[seed, module::EXPERIMENT, trial as u64]), ..spec.clone() };
            let sk = make_sketch::<T>(&spec)?;
            let cols = unit.iter().map(|v| sketch_apply(v, &sk)).collect::<Result<Vec<_>>>()?;
            let m = DMatrix::from_columns(&cols) * &w;
            let vals = hermitian_eigenvalues(&(m.adjoint() * &m));
            Ok(SpectrumRow { trial, sigma_min_sq: vals[0].max(0.0), sigma_max_sq: vals[vals.len() - 1] })
        })
        .collect::<Result<_>>()?;
    let info = BasisInfo {
        dims,
        r: basis.len(),
        basis_rank: basis.iter().map(|v| v.max_rank()).max().unwrap_or(1),
        gram_condition: cond,
    };
    Ok(SpectrumReport { basis: info, spec: spec.clone(), trials: rows })
}
