//! Dense oracles built from core entries only, shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ttstack::sketch::RealizedSketch;
use ttstack::{Core, OpCore, Scalar, TensorTrain};

/// `M[a, (i_1, …, i_m)]` for a chain of cores whose last right rank is 1.
pub fn chain<T: Scalar>(cores: &[Core<T>]) -> DMatrix<T> {
    assert_eq!(cores.last().unwrap().right(), 1);
    let mut m = DMatrix::<T>::from_element(1, 1, T::one());
    for c in cores.iter().rev() {
        let tail = m.ncols();
        let mut next = DMatrix::<T>::zeros(c.left(), c.n() * tail);
        for a in 0..c.left() {
            for i in 0..c.n() {
                for b in 0..c.right() {
                    let g = c.get(a, i, b);
                    for t in 0..tail {
                        next[(a, i * tail + t)] += g * m[(b, t)];
                    }
                }
            }
        }
        m = next;
    }
    m
}

pub fn dense_vector<T: Scalar>(x: &TensorTrain<T>) -> DVector<T> {
    chain(x.cores()).row(0).transpose()
}

/// `H^{≥k}` for every left bond index, as `N_out × N_in` matrices.
pub fn op_chain<T: Scalar>(cores: &[OpCore<T>]) -> Vec<DMatrix<T>> {
    let mut m = vec![DMatrix::<T>::from_element(1, 1, T::one())];
    for c in cores.iter().rev() {
        let (ro, ci) = (m[0].nrows(), m[0].ncols());
        let mut next = vec![DMatrix::<T>::zeros(c.n_out() * ro, c.n_in() * ci); c.left()];
        for (h, out) in next.iter_mut().enumerate() {
            for i in 0..c.n_out() {
                for j in 0..c.n_in() {
                    for h2 in 0..c.right() {
                        let g = c.get(h, i, j, h2);
                        let mut view = out.view_mut((i * ro, j * ci), (ro, ci));
                        view += &m[h2] * g;
                    }
                }
            }
        }
        m = next;
    }
    m
}

/// Dense `Ω` with the scale applied, block-major rows.
pub fn dense_sketch<T: Scalar>(sk: &RealizedSketch<T>) -> DMatrix<T> {
    let blocks: Vec<DMatrix<T>> = sk.blocks().iter().map(|b| chain(b)).collect();
    let n = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, n);
    let mut r0 = 0;
    for b in &blocks {
        out.view_mut((r0, 0), (b.nrows(), n)).copy_from(b);
        r0 += b.nrows();
    }
    out * T::from_re(sk.scale())
}

/// Unscaled `W_k = Ω^{≥k} Yᵀ` for the rows `Y` of a trailing unfolding.
pub fn oracle_partial<T: Scalar>(sk: &RealizedSketch<T>, k: usize, trailing: &DMatrix<T>) -> DMatrix<T> {
    let parts: Vec<DMatrix<T>> = sk.blocks().iter().map(|b| chain(&b[k..]) * trailing.transpose()).collect();
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, trailing.nrows());
    let mut r0 = 0;
    for p in &parts {
        out.view_mut((r0, 0), (p.nrows(), p.ncols())).copy_from(p);
        r0 += p.nrows();
    }
    out
}

pub fn rel<T: Scalar>(got: &DMatrix<T>, want: &DMatrix<T>) -> f64 {
    assert_eq!(got.shape(), want.shape());
    (got - want).norm() / want.norm()
}

pub fn rel_vec<T: Scalar>(got: &DVector<T>, want: &DVector<T>) -> f64 {
    (got - want).norm() / want.norm()
}

pub fn stack_rows<T: Scalar>(parts: &[DMatrix<T>]) -> DMatrix<T> {
    let cols = parts[0].ncols();
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        out.view_mut((r0, 0), (p.nrows(), cols)).copy_from(p);
        r0 += p.nrows();
    }
    out
}
