use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::scalar::Scalar;
use crate::sketch::{make_sketch, SketchSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct QbResult<T: Scalar> {
    /// Orthonormal basis of the range of `AΩ*`.
    pub q: DMatrix<T>,
    /// `‖A − QQ*A‖_F`.
    pub error: f64,
    pub summary: QbSummary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbSummary {
    pub blocks_used: usize,
    pub blocks: usize,
    pub rank: usize,
}

/// Sketched range finder `Q = orth(AΩ*)` for a dense `A` with rows in the
/// sketch's input space.
///
/// Blocks of `Ω` are folded in one at a time. Once `AΩ*` spans all of the
/// row space `F^k`, further blocks cannot change `Q`, so the remaining
/// ones are skipped; `summary.blocks_used` records where this happened.
pub fn qb_sketch<T: Scalar>(a: &DMatrix<T>, spec: &SketchSpec) -> Result<QbResult<T>> {
    let n: usize = spec.dims.iter().product();
    if a.ncols() != n {
        return Err(Error::DimMismatch(format!("A has {} columns, sketch acts on dimension {n}", a.ncols())));
    }
    let sk = make_sketch::<T>(spec)?;
    let k = a.nrows();
    let mut y = DMatrix::<T>::zeros(k, 0);
    let mut used = 0;
    let mut basis = None;
    for j in 0..sk.num_blocks() {
        let block = a * sk.block_dense(j)?.adjoint();
        let c0 = y.ncols();
        y = y.resize_horizontally(c0 + block.ncols(), T::zero());
        y.columns_mut(c0, block.ncols()).copy_from(&block);
        used = j + 1;
        if y.ncols() >= k {
            let (q, rank) = orth(&y)?;
            if rank == k {
                basis = Some((q, rank));
                break;
            }
        }
    }
    let (q, rank) = match basis {
        Some(b) => b,
        None => orth(&y)?,
    };
    let error = (a - &q * (q.adjoint() * a)).norm();
    Ok(QbResult { q, error, summary: QbSummary { blocks_used: used, blocks: sk.num_blocks(), rank } })
}

fn orth<T: Scalar>(y: &DMatrix<T>) -> Result<(DMatrix<T>, usize)> {
    let dec = svd(y.clone())?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let tol = smax * f64::EPSILON * y.nrows().max(y.ncols()) as f64;
    let rank = dec.s.iter().filter(|&&s| s > tol).count();
    Ok((dec.u.columns(0, rank).into_owned(), rank))
}
