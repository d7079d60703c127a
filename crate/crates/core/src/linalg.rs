//! Dense linear-algebra plumbing on top of `nalgebra`.
//!
//! Cores are stored row-major, `nalgebra` is column-major, so the helpers
//! here also own the conversion between the two.

use nalgebra::{DMatrix, DVector, QR};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Builds a matrix from row-major data.
pub fn from_rows<T: Scalar>(rows: usize, cols: usize, data: &[T]) -> DMatrix<T> {
    debug_assert_eq!(data.len(), rows * cols);
    DMatrix::from_row_slice(rows, cols, data)
}

/// Row-major copy of a matrix.
pub fn to_rows<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn frobenius<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.abs2()).sum::<f64>().sqrt()
}

pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.modulus()).fold(0.0, f64::max)
}

/// Thin QR: `Q` is `m × min(m,n)`, `R` is `min(m,n) × n`.
pub fn thin_qr<T: Scalar>(a: DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        let k = m.min(n);
        return (DMatrix::zeros(m, k), DMatrix::zeros(k, n));
    }
    let qr = QR::new(a);
    (qr.q(), qr.r())
}

/// Thin SVD with singular values sorted in descending order.
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub vt: DMatrix<T>,
}

pub fn svd<T: Scalar>(a: DMatrix<T>) -> Result<Svd<T>> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd { u: DMatrix::zeros(m, 0), s: vec![], vt: DMatrix::zeros(0, n) });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Decomposition("non-finite entries passed to SVD".into()));
    }
    let fail = |e: faer::linalg::solvers::SvdError| Error::Decomposition(format!("SVD of a {m}×{n} matrix failed: {e:?}"));
    // nalgebra's bidiagonal SVD loses accuracy on nearly rank-deficient
    // unfoldings, which TT rounding produces all the time
    match T::FIELD {
        Field::Real => {
            let f = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)].to_c64().re);
            let dec = f.thin_svd().map_err(fail)?;
            Ok(collect_svd(dec.U(), dec.S().column_vector(), dec.V(), k, |x: f64| T::from_re(x), |x| x))
        }
        Field::Complex => {
            let f = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)].to_c64());
            let dec = f.thin_svd().map_err(fail)?;
            Ok(collect_svd(dec.U(), dec.S().column_vector(), dec.V(), k, T::from_c64, |x| x.re))
        }
    }
}

fn collect_svd<T: Scalar, E: Copy>(
    u: faer::MatRef<'_, E>,
    s: faer::ColRef<'_, E>,
    v: faer::MatRef<'_, E>,
    k: usize,
    conv: impl Fn(E) -> T,
    real: impl Fn(E) -> f64,
) -> Svd<T> {
    Svd {
        u: DMatrix::from_fn(u.nrows(), k, |i, j| conv(u[(i, j)])),
        s: (0..k).map(|i| real(s[i])).collect(),
        vt: DMatrix::from_fn(k, v.nrows(), |i, j| conv(v[(j, i)]).conjugate()),
    }
}

impl<T: Scalar> Svd<T> {
    /// Keeps the leading `r` triplets.
    pub fn truncate(self, r: usize) -> Svd<T> {
        let r = r.min(self.s.len());
        Svd {
            u: self.u.columns(0, r).into_owned(),
            s: self.s[..r].to_vec(),
            vt: self.vt.rows(0, r).into_owned(),
        }
    }
}

/// Smallest rank whose discarded tail has Frobenius norm at most `tol`,
/// capped at `max_rank` and floored at 1.
pub fn rank_for_tolerance(s: &[f64], tol: f64, max_rank: usize) -> usize {
    let mut tail = 0.0;
    let mut r = s.len();
    while r > 1 {
        let next = tail + s[r - 1] * s[r - 1];
        if next.sqrt() > tol {
            break;
        }
        tail = next;
        r -= 1;
    }
    r.min(max_rank).max(1.min(s.len()))
}

/// Pseudo-inverse that drops singular values below `rel_tol · σ_max`.
pub fn pinv_trunc<T: Scalar>(a: &DMatrix<T>, rel_tol: f64) -> Result<DMatrix<T>> {
    let (m, n) = a.shape();
    let dec = svd(a.clone())?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut out = DMatrix::<T>::zeros(n, m);
    if smax == 0.0 {
        return Ok(out);
    }
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj <= rel_tol * smax {
            break;
        }
        let v = dec.vt.row(j).adjoint();
        let u = dec.u.column(j).adjoint();
        out += (v * u) * T::from_re(1.0 / sj);
    }
    Ok(out)
}

/// Least-squares solution of `A x = b` through the truncated pseudo-inverse.
pub fn lstsq<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rel_tol: f64) -> Result<DMatrix<T>> {
    Ok(pinv_trunc(a, rel_tol)? * b)
}

/// Spectral condition number `σ_max/σ_min`; infinite when rank deficient.
pub fn condition_number<T: Scalar>(a: &DMatrix<T>) -> Result<f64> {
    let dec = svd(a.clone())?;
    match (dec.s.first(), dec.s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig<T: Scalar>(a: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let n = a.nrows();
    let sym = (a + a.adjoint()) * T::from_re(0.5);
    let dec = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let vals = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<T>::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &dec.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending, without eigenvectors.
pub fn hermitian_eigenvalues<T: Scalar>(a: &DMatrix<T>) -> Vec<f64> {
    let sym = (a + a.adjoint()) * T::from_re(0.5);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigenpairs of a general square matrix over ℂ.
///
/// Eigenvalues come from a complex Schur form; each eigenvector is the
/// right singular vector of `A − λI` with the smallest singular value.
pub fn general_eig(a: &DMatrix<Complex64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON * 0.5, 0)
        .ok_or_else(|| Error::Decomposition("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-12 * scale {
            return Err(Error::Decomposition("complex Schur form is not triangular".into()));
        }
        let lambda = t[(i, i)];
        let shifted = a - DMatrix::<Complex64>::identity(n, n) * lambda;
        let dec = svd(shifted)?;
        let v = dec.vt.row(n - 1).adjoint();
        pairs.push((lambda, v));
    }
    Ok(pairs)
}

/// `rows × cols` matrix with orthonormal rows, Haar distributed on the
/// Stiefel manifold. Requires `rows ≤ cols`.
pub fn haar_rows<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    assert!(rows <= cols, "cannot fit {rows} orthonormal rows in dimension {cols}");
    let data: Vec<T> = (0..rows * cols).map(|_| T::sample_normal(rng)).collect();
    // columns of the tall factor become the rows of the result
    let tall = from_rows(cols, rows, &data);
    let (mut q, r) = thin_qr(tall);
    for j in 0..rows {
        let d = r[(j, j)];
        let m = d.modulus();
        // phase fix so the law is exactly Haar
        let phase = if m > 0.0 { d * T::from_re(1.0 / m) } else { T::one() };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q.adjoint()
}
