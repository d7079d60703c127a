use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gamma::GammaTable;
use super::partial_trace::{split, Split};
use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::rng::{module, stream};
use crate::scalar::Scalar;
use crate::tt::TensorTrain;

/// `C_{Q,I} = max_{‖u‖=1} ‖Tr_I[(Qu)(Qu)*]‖_F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entanglement {
    pub value: f64,
    /// True when the span is one-dimensional and no search was needed.
    /// Otherwise `value` is the best of `starts` local ascents, a lower
    /// bound.
    pub exact: bool,
    pub starts: usize,
    /// `1/√n_{I^c}`.
    pub floor: f64,
}

const MAX_ITERS: usize = 1000;

fn orthonormal_basis<T: Scalar>(q: &DMatrix<T>) -> Result<DMatrix<T>> {
    if q.ncols() == 0 || q.nrows() == 0 {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let dec = svd(q.clone())?;
    let tol = dec.s[0] * 1e-12 * (q.nrows().max(q.ncols()) as f64);
    let rank = dec.s.iter().filter(|&&s| s > tol).count();
    if rank == 0 {
        return Err(Error::InvalidArgument("basis is numerically zero".into()));
    }
    Ok(dec.u.columns(0, rank).into_owned())
}

fn reshape<T: Scalar>(x: &DVector<T>, sp: &Split) -> DMatrix<T> {
    let mut m = DMatrix::<T>::zeros(sp.n_traced, sp.n_kept);
    for (f, &v) in x.iter().enumerate() {
        m[(sp.traced[f], sp.kept[f])] = v;
    }
    m
}

fn flatten<T: Scalar>(m: &DMatrix<T>, sp: &Split) -> DVector<T> {
    DVector::from_fn(sp.traced.len(), |f, _| m[(sp.traced[f], sp.kept[f])])
}

/// `‖Tr_I[xx*]‖_F = ‖X*X‖_F` with `X` the `n_I × n_{I^c}` matricization.
fn objective<T: Scalar>(x: &DMatrix<T>) -> f64 {
    (x.adjoint() * x).norm()
}

/// Entanglement constant of the span of the columns of `q` (need not be
/// orthonormal). For spans of dimension above one, maximizes the quartic
/// `‖Tr_I[xx*]‖²_F` over the unit sphere of the span by the monotone
/// ascent `u ← Q*vec(XX*X)/‖·‖`, from `starts` random and `r` coordinate
/// starting points.
pub fn entanglement_constant<T: Scalar>(
    q: &DMatrix<T>,
    dims: &[usize],
    mask: u32,
    starts: usize,
    seed: u64,
) -> Result<Entanglement> {
    let n: usize = dims.iter().product();
    if q.nrows() != n {
        return Err(Error::DimMismatch(format!("basis has {} rows, space has dimension {n}", q.nrows())));
    }
    let q = orthonormal_basis(q)?;
    let sp = split(dims, mask)?;
    let floor = 1.0 / (sp.n_kept as f64).sqrt();
    if q.ncols() == 1 {
        let value = objective(&reshape(&q.column(0).into_owned(), &sp));
        return Ok(Entanglement { value, exact: true, starts: 0, floor });
    }
    let r = q.ncols();
    let mut rng = stream(seed, module::ENTANGLEMENT, 0, 0);
    let mut inits: Vec<DVector<T>> = (0..r).map(|i| DVector::from_fn(r, |j, _| if i == j { T::one() } else { T::zero() })).collect();
    inits.extend((0..starts).map(|_| DVector::from_fn(r, |_, _| T::sample_normal(&mut rng))));
    let mut best = 0.0f64;
    for mut u in inits {
        u /= T::from_re(u.norm());
        let mut val = 0.0;
        for _ in 0..MAX_ITERS {
            let x = reshape(&(&q * &u), &sp);
            let next_val = objective(&x);
            let g = flatten(&(&x * (x.adjoint() * &x)), &sp);
            let mut next = q.adjoint() * g;
            let nn = next.norm();
            if nn == 0.0 {
                val = next_val;
                break;
            }
            next /= T::from_re(nn);
            let done = (next_val - val).abs() <= 1e-15 * next_val;
            val = next_val;
            u = next;
            if done {
                break;
            }
        }
        best = best.max(val);
    }
    Ok(Entanglement { value: best, exact: false, starts: r + starts, floor })
}

/// [`entanglement_constant`] of the span of a list of tensor trains.
pub fn entanglement_constant_tt<T: Scalar>(
    basis: &[TensorTrain<T>],
    mask: u32,
    starts: usize,
    seed: u64,
) -> Result<Entanglement> {
    let q = dense_basis(basis)?;
    entanglement_constant(&q, &basis[0].dims(), mask, starts, seed)
}

pub(crate) fn dense_basis<T: Scalar>(basis: &[TensorTrain<T>]) -> Result<DMatrix<T>> {
    let first = basis.first().ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
    let dims = first.dims();
    let n: usize = dims.iter().product();
    let mut q = DMatrix::<T>::zeros(n, basis.len());
    for (j, v) in basis.iter().enumerate() {
        if v.dims() != dims {
            return Err(Error::DimMismatch("basis vectors with different mode sizes".into()));
        }
        q.set_column(j, &DVector::from_vec(v.to_vector()?));
    }
    Ok(q)
}

/// `C_Q(R) = Σ_{I ⊊ [d]} γ_I C_{Q,I}`, a lower-bound estimate whenever any
/// of the `C_{Q,I}` is.
pub fn entanglement_measure<T: Scalar>(
    q: &DMatrix<T>,
    dims: &[usize],
    r: usize,
    starts: usize,
    seed: u64,
) -> Result<f64> {
    let table = GammaTable::new(dims.len(), r, T::FIELD)?;
    let full = (1u32 << dims.len()) - 1;
    let mut total = 0.0;
    for mask in 0..full {
        let g = table.get(mask);
        if g != 0.0 {
            total += g * entanglement_constant(q, dims, mask, starts, seed)?.value;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = DMatrix::from_column_slice(4, 1, &[s, 0.0, 0.0, s]);
        let e = entanglement_constant(&q, &[2, 2], 0b01, 0, 0).unwrap();
        assert!(e.exact);
        assert!((e.value - s).abs() < 1e-14);
    }

    #[test]
    fn kronecker_vector_in_span() {
        let dims = [2, 3, 2];
        let kron = TensorTrain::<f64>::random_kronecker(&dims, 1).unwrap();
        let other = TensorTrain::<f64>::random_uniform(&dims, 2, 2).unwrap();
        let third = TensorTrain::<f64>::random_uniform(&dims, 2, 3).unwrap();
        let basis = [other, kron, third];
        for mask in [0b001, 0b010, 0b101] {
            let e = entanglement_constant_tt(&basis, mask, 16, 4).unwrap();
            assert!((e.value - 1.0).abs() < 1e-10, "{mask:#b}: {}", e.value);
        }
    }

    #[test]
    fn within_bounds() {
        let dims = [3, 3, 2];
        let mut rng = stream(1, module::EXPERIMENT, 0, 0);
        let q = DMatrix::<Complex64>::from_fn(18, 3, |_, _| Complex64::sample_normal(&mut rng));
        for mask in 0..8 {
            let e = entanglement_constant(&q, &dims, mask, 8, 2).unwrap();
            assert!(e.value >= e.floor - 1e-12 && e.value <= 1.0 + 1e-12, "{mask}: {e:?}");
        }
    }

    #[test]
    fn full_subset_is_one() {
        let q = DMatrix::<f64>::from_fn(8, 2, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let e = entanglement_constant(&q, &[2, 2, 2], 0b111, 4, 0).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_under_cap() {
        let dims = [2, 2, 2];
        let mut rng = stream(3, module::EXPERIMENT, 0, 0);
        let q = DMatrix::<f64>::from_fn(8, 2, |_, _| f64::sample_normal(&mut rng));
        let c = entanglement_measure(&q, &dims, 4, 8, 0).unwrap();
        assert!(c > 0.0 && c <= super::super::cq_upper_bound(3, 4, crate::Field::Real) + 1e-12);
    }

    #[test]
    fn empty_basis_rejected() {
        assert!(entanglement_constant(&DMatrix::<f64>::zeros(4, 0), &[2, 2], 1, 1, 0).is_err());
    }
}
