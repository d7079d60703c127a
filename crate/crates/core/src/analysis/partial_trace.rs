use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bitmask of a list of 0-based modes.
pub fn mask_of(modes: &[usize]) -> u32 {
    modes.iter().fold(0, |m, &k| m | (1 << k))
}

/// Splits every multi-index into its traced part (modes in `mask`) and its
/// complement, both in row-major order of the surviving modes.
pub(crate) struct Split {
    pub traced: Vec<usize>,
    pub kept: Vec<usize>,
    pub n_traced: usize,
    pub n_kept: usize,
}

pub(crate) fn split(dims: &[usize], mask: u32) -> Result<Split> {
    let d = dims.len();
    if d > 31 || (mask >> d) != 0 {
        return Err(Error::InvalidArgument(format!("subset {mask:#b} is not inside {d} modes")));
    }
    let n: usize = dims.iter().product();
    let n_traced: usize = (0..d).filter(|k| mask >> k & 1 == 1).map(|k| dims[k]).product();
    let mut traced = vec![0; n];
    let mut kept = vec![0; n];
    let mut idx = vec![0usize; d];
    for f in 0..n {
        let (mut t, mut c) = (0, 0);
        for k in 0..d {
            if mask >> k & 1 == 1 {
                t = t * dims[k] + idx[k];
            } else {
                c = c * dims[k] + idx[k];
            }
        }
        traced[f] = t;
        kept[f] = c;
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(Split { traced, kept, n_traced, n_kept: n / n_traced })
}

/// `Tr_I S` for a square `S` acting on `F^{n_1} ⊗ ⋯ ⊗ F^{n_d}`.
pub fn partial_trace<T: Scalar>(s: &DMatrix<T>, dims: &[usize], mask: u32) -> Result<DMatrix<T>> {
    let n: usize = dims.iter().product();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::DimMismatch(format!("{}×{} matrix on a space of dimension {n}", s.nrows(), s.ncols())));
    }
    let sp = split(dims, mask)?;
    let mut groups = vec![Vec::new(); sp.n_traced];
    for f in 0..n {
        groups[sp.traced[f]].push(f);
    }
    let mut out = DMatrix::<T>::zeros(sp.n_kept, sp.n_kept);
    for g in &groups {
        for &f1 in g {
            for &f2 in g {
                out[(sp.kept[f1], sp.kept[f2])] += s[(f1, f2)];
            }
        }
    }
    Ok(out)
}

/// Both sides of `‖Tr_I[ab*]‖²_F ≤ ‖Tr_I[aa*]‖_F ‖Tr_I[bb*]‖_F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl CsCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn cs_check<T: Scalar>(a: &DVector<T>, b: &DVector<T>, dims: &[usize], mask: u32) -> Result<CsCheck> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let ab = partial_trace(&(a * b.adjoint()), dims, mask)?;
    let aa = partial_trace(&(a * a.adjoint()), dims, mask)?;
    let bb = partial_trace(&(b * b.adjoint()), dims, mask)?;
    Ok(CsCheck { lhs: ab.norm_squared(), rhs: aa.norm() * bb.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;
    use num_complex::Complex64;

    #[test]
    fn trivial_subsets() {
        let s = from_rows(4, 4, &(0..16).map(|v| v as f64).collect::<Vec<_>>());
        assert_eq!(partial_trace(&s, &[2, 2], 0).unwrap(), s);
        let full = partial_trace(&s, &[2, 2], 0b11).unwrap();
        assert_eq!(full.shape(), (1, 1));
        assert_eq!(full[(0, 0)], s.trace());
    }

    #[test]
    fn kronecker_product() {
        let a = from_rows(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = from_rows(2, 2, &[0.5, -1.0, 2.0, 7.0]);
        let s = a.kronecker(&b);
        // tracing the first factor leaves Tr(A)·B, the second leaves Tr(B)·A
        assert!((partial_trace(&s, &[2, 2], 0b01).unwrap() - &b * a.trace()).norm() < 1e-14);
        assert!((partial_trace(&s, &[2, 2], 0b10).unwrap() - &a * b.trace()).norm() < 1e-14);
    }

    #[test]
    fn out_of_range_subset() {
        let s = DMatrix::<f64>::identity(4, 4);
        assert!(partial_trace(&s, &[2, 2], 0b100).is_err());
        assert!(partial_trace(&s, &[2, 3], 1).is_err());
    }

    #[test]
    fn cs_equality_for_equal_vectors() {
        let a = DVector::from_fn(8, |i, _| Complex64::new(i as f64, 1.0 - i as f64));
        let c = cs_check(&a, &a, &[2, 2, 2], 0b010).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-10 * c.rhs);
    }

    #[test]
    fn cs_orthogonal_kronecker() {
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        let a = e0.kronecker(&e0);
        let b = e1.kronecker(&e1);
        assert_eq!(cs_check(&a, &b, &[2, 2], 0b01).unwrap().lhs, 0.0);
    }
}
