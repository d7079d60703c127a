//! Tensor trains and their dense oracles.
//!
//! A core is an order-3 array `r_{k-1} × n_k × r_k` stored row-major: the
//! left bond is slowest and the right bond fastest. Entry
//! `x[i₁,…,i_d] = C₁[i₁] C₂[i₂] ⋯ C_d[i_d]` where `C_k[i]` is the
//! `r_{k-1} × r_k` slice. A train with `r₀ > 1` or `r_d > 1` is a *block*
//! train; its dense form keeps the two boundary axes.
//!
//! Multi-indices are linearized row-major everywhere (first index slowest).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{from_rows, thin_qr, to_rows};
use crate::rng::{module, stream};
use crate::scalar::Scalar;

/// Default limit on the number of entries any dense oracle may allocate.
pub const DENSE_CAP: usize = 1 << 20;

/// One order-3 core.
#[derive(Clone, Debug, PartialEq)]
pub struct Core<T> {
    left: usize,
    n: usize,
    right: usize,
    data: Vec<T>,
}

impl<T: Scalar> Core<T> {
    pub fn new(left: usize, n: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != left * n * right {
            return Err(Error::DimMismatch(format!(
                "core {left}×{n}×{right} needs {} entries, got {}",
                left * n * right,
                data.len()
            )));
        }
        if left == 0 || n == 0 || right == 0 {
            return Err(Error::InvalidArgument("core dimensions must be positive".into()));
        }
        Ok(Core { left, n, right, data })
    }

    pub fn zeros(left: usize, n: usize, right: usize) -> Self {
        Core { left, n, right, data: vec![T::zero(); left * n * right] }
    }

    pub fn from_fn(left: usize, n: usize, right: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(left * n * right);
        for a in 0..left {
            for i in 0..n {
                for b in 0..right {
                    data.push(f(a, i, b));
                }
            }
        }
        Core { left, n, right, data }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> T {
        self.data[(a * self.n + i) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, b: usize, v: T) {
        self.data[(a * self.n + i) * self.right + b] = v;
    }

    /// The `r_{k-1} × r_k` slice at physical index `i`.
    pub fn slice(&self, i: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.left, self.right, |a, b| self.get(a, i, b))
    }

    /// `(r_{k-1} n_k) × r_k` unfolding.
    pub fn left_unfolding(&self) -> DMatrix<T> {
        from_rows(self.left * self.n, self.right, &self.data)
    }

    /// `r_{k-1} × (n_k r_k)` unfolding.
    pub fn right_unfolding(&self) -> DMatrix<T> {
        from_rows(self.left, self.n * self.right, &self.data)
    }

    pub fn from_left_unfolding(n: usize, m: &DMatrix<T>) -> Self {
        assert_eq!(m.nrows() % n, 0);
        Core { left: m.nrows() / n, n, right: m.ncols(), data: to_rows(m) }
    }

    pub fn from_right_unfolding(n: usize, m: &DMatrix<T>) -> Self {
        assert_eq!(m.ncols() % n, 0);
        Core { left: m.nrows(), n, right: m.ncols() / n, data: to_rows(m) }
    }

    pub fn scale(&mut self, alpha: T) {
        for z in &mut self.data {
            *z *= alpha;
        }
    }

    /// Frobenius norm of the core.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.abs2()).sum::<f64>().sqrt()
    }
}

/// Which canonical form a train is known to be in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orthogonality {
    None,
    /// Cores `1..d-1` have orthonormal columns in the left unfolding.
    Left,
    /// Cores `2..d` have orthonormal rows in the right unfolding.
    Right,
}

/// A tensor train, possibly with non-trivial boundary ranks.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrain<T> {
    cores: Vec<Core<T>>,
    orth: Orthogonality,
}

impl<T: Scalar> TensorTrain<T> {
    /// Validates rank consistency between neighbouring cores.
    pub fn new(cores: Vec<Core<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidArgument("a tensor train needs at least one core".into()));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::RankMismatch { bond: k + 1, left: w[0].right, right: w[1].left });
            }
        }
        Ok(TensorTrain { cores, orth: Orthogonality::None })
    }

    pub(crate) fn with_orthogonality(mut self, orth: Orthogonality) -> Self {
        self.orth = orth;
        self
    }

    pub fn orthogonality(&self) -> Orthogonality {
        self.orth
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.n).collect()
    }

    /// Bond ranks `r₀, …, r_d`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![self.cores[0].left];
        r.extend(self.cores.iter().map(|c| c.right));
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn is_block(&self) -> bool {
        self.cores[0].left != 1 || self.cores[self.cores.len() - 1].right != 1
    }

    pub fn cores(&self) -> &[Core<T>] {
        &self.cores
    }

    pub fn core(&self, k: usize) -> &Core<T> {
        &self.cores[k]
    }

    pub fn into_cores(self) -> Vec<Core<T>> {
        self.cores
    }

    /// Number of stored scalars.
    pub fn storage(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    /// Number of entries of the represented tensor, boundary axes included.
    pub fn full_size(&self) -> usize {
        let r = self.ranks();
        self.dims().iter().product::<usize>() * r[0] * r[self.order()]
    }

    /// Multiplies the tensor by `alpha`, folding it into the last core.
    pub fn scaled(mut self, alpha: T) -> Self {
        let last = self.cores.len() - 1;
        self.cores[last].scale(alpha);
        if self.orth == Orthogonality::Right && last > 0 {
            self.orth = Orthogonality::None;
        }
        self
    }

    /// Entry at a multi-index; for block trains this is the `r₀ × r_d` block.
    pub fn evaluate_block(&self, index: &[usize]) -> DMatrix<T> {
        assert_eq!(index.len(), self.order());
        let mut acc = self.cores[0].slice(index[0]);
        for (core, &i) in self.cores.iter().zip(index).skip(1) {
            acc = acc * core.slice(i);
        }
        acc
    }

    /// Entry at a multi-index of a plain train.
    pub fn evaluate(&self, index: &[usize]) -> T {
        self.evaluate_block(index)[(0, 0)]
    }

    /// Dense array with shape `[r₀, n₁, …, n_d, r_d]`.
    pub fn dense_chain(&self, cap: usize) -> Result<DenseTensor<T>> {
        let r = self.ranks();
        let requested = self.full_size();
        if requested > cap {
            return Err(Error::DenseCap { requested, cap });
        }
        // accumulate (r₀ · n₁⋯n_k) × r_k left to right
        let mut acc = self.cores[0].left_unfolding();
        for core in &self.cores[1..] {
            let rows = acc.nrows();
            let prod = acc * core.right_unfolding();
            // rows × (n r) row-major is (rows n) × r row-major
            acc = from_rows(rows * core.n, core.right, &to_rows(&prod));
        }
        let mut shape = vec![r[0]];
        shape.extend(self.dims());
        shape.push(r[self.order()]);
        Ok(DenseTensor { shape, data: to_rows(&acc) })
    }

    /// Dense oracle. Shape is `dims`, with the boundary axes in front and at
    /// the back when the train is a block train.
    pub fn dense(&self) -> Result<DenseTensor<T>> {
        self.dense_with_cap(DENSE_CAP)
    }

    pub fn dense_with_cap(&self, cap: usize) -> Result<DenseTensor<T>> {
        let chain = self.dense_chain(cap)?;
        if self.is_block() {
            Ok(chain)
        } else {
            Ok(DenseTensor { shape: self.dims(), data: chain.data })
        }
    }

    /// Dense vector of a plain train.
    pub fn to_vector(&self) -> Result<Vec<T>> {
        if self.is_block() {
            return Err(Error::InvalidArgument("to_vector needs boundary ranks 1".into()));
        }
        Ok(self.dense()?.data)
    }

    /// Iid `N_F(0,1)` cores with the given bond ranks `r₀, …, r_d`.
    pub fn random(dims: &[usize], ranks: &[usize], seed: u64) -> Result<Self> {
        if ranks.len() != dims.len() + 1 {
            return Err(Error::DimMismatch(format!(
                "{} modes need {} ranks, got {}",
                dims.len(),
                dims.len() + 1,
                ranks.len()
            )));
        }
        let cores = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut rng = stream(seed, module::RANDOM_TT, 0, k as u64);
                Core::from_fn(ranks[k], n, ranks[k + 1], |_, _, _| T::sample_normal(&mut rng))
            })
            .collect();
        TensorTrain::new(cores)
    }

    /// Random plain train with all interior ranks equal to `rank`.
    pub fn random_uniform(dims: &[usize], rank: usize, seed: u64) -> Result<Self> {
        let mut ranks = vec![rank; dims.len() + 1];
        ranks[0] = 1;
        ranks[dims.len()] = 1;
        Self::random(dims, &ranks, seed)
    }

    /// Random rank-one train `v₁ ⊗ ⋯ ⊗ v_d`.
    pub fn random_kronecker(dims: &[usize], seed: u64) -> Result<Self> {
        Self::random(dims, &vec![1; dims.len() + 1], seed)
    }

    /// Rank-one train from explicit factors.
    pub fn kronecker(factors: &[Vec<T>]) -> Result<Self> {
        let cores = factors
            .iter()
            .map(|f| Core::new(1, f.len(), 1, f.clone()))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }

    /// Exact or truncated train from a dense tensor by sequential SVDs.
    pub fn from_dense(t: &DenseTensor<T>, max_rank: usize, rel_tol: f64) -> Result<Self> {
        let dims = t.shape.clone();
        let d = dims.len();
        let total: f64 = t.data.iter().map(|z| z.abs2()).sum::<f64>().sqrt();
        let delta = rel_tol * total / ((d.max(2) - 1) as f64).sqrt();
        let mut cores = Vec::with_capacity(d);
        let mut rest = from_rows(dims[0], t.data.len() / dims[0], &t.data);
        let mut left = 1;
        for k in 0..d - 1 {
            let rows = left * dims[k];
            let m = from_rows(rows, rest.len() / rows, &to_rows(&rest));
            let dec = crate::linalg::svd(m)?;
            let r = crate::linalg::rank_for_tolerance(&dec.s, delta, max_rank);
            let dec = dec.truncate(r);
            cores.push(Core::from_left_unfolding(dims[k], &dec.u));
            let mut sv = dec.vt;
            for (j, &s) in dec.s.iter().enumerate() {
                let mut row = sv.row_mut(j);
                row *= T::from_re(s);
            }
            rest = sv;
            left = r;
        }
        cores.push(Core::from_right_unfolding(dims[d - 1], &from_rows(left, dims[d - 1], &to_rows(&rest))));
        TensorTrain::new(cores)
    }
}

/// Dense row-major array.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::DimMismatch(format!("shape {shape:?} does not hold {} entries", data.len())));
        }
        Ok(DenseTensor { shape, data })
    }

    /// Unfolding `X^{≤ℓ}`: rows are the first `ℓ` axes, columns the rest.
    pub fn unfold(&self, l: usize) -> DMatrix<T> {
        assert!(l <= self.shape.len());
        let rows: usize = self.shape[..l].iter().product();
        from_rows(rows, self.data.len() / rows.max(1), &self.data)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.abs2()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &DenseTensor<T>) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).abs2()).sum::<f64>().sqrt()
    }
}

/// Strong Kronecker product of two core chains.
///
/// A chain is a dense array whose first and last axes are bond indices,
/// shape `[r, n…, s]`. The product contracts the trailing bond of `a` with
/// the leading bond of `b`.
pub fn strong_kron<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let ra = *a.shape.last().unwrap();
    if b.shape[0] != ra {
        return Err(Error::RankMismatch { bond: a.shape.len() - 2, left: ra, right: b.shape[0] });
    }
    let am = from_rows(a.data.len() / ra, ra, &a.data);
    let bm = from_rows(ra, b.data.len() / ra, &b.data);
    let mut shape = a.shape[..a.shape.len() - 1].to_vec();
    shape.extend_from_slice(&b.shape[1..]);
    Ok(DenseTensor { shape, data: to_rows(&(am * bm)) })
}

/// Core as a chain `[r_{k-1}, n_k, r_k]`.
pub fn core_chain<T: Scalar>(c: &Core<T>) -> DenseTensor<T> {
    DenseTensor { shape: vec![c.left, c.n, c.right], data: c.data.clone() }
}

/// One step of the transfer-matrix contraction `E ↦ Σ_i X[i]* E Y[i]`.
fn transfer<T: Scalar>(e: &DMatrix<T>, x: &Core<T>, y: &Core<T>) -> DMatrix<T> {
    let f = e * y.right_unfolding();
    let f = from_rows(x.left * x.n, y.right, &to_rows(&f));
    x.left_unfolding().adjoint() * f
}

/// `⟨x, y⟩ = Σ conj(x) y`.
pub fn inner<T: Scalar>(x: &TensorTrain<T>, y: &TensorTrain<T>) -> Result<T> {
    check_same_dims(x, y)?;
    if x.is_block() || y.is_block() {
        return Err(Error::InvalidArgument("inner product needs boundary ranks 1".into()));
    }
    let mut e = DMatrix::<T>::from_element(1, 1, T::one());
    for (cx, cy) in x.cores.iter().zip(&y.cores) {
        e = transfer(&e, cx, cy);
    }
    Ok(e[(0, 0)])
}

/// Frobenius norm, computed from a right-orthogonal form so that it is
/// accurate to relative machine precision.
pub fn norm<T: Scalar>(x: &TensorTrain<T>) -> f64 {
    let ortho = orthogonalize(x, Orthogonality::Right);
    ortho.cores[0].norm()
}

fn check_same_dims<T: Scalar>(x: &TensorTrain<T>, y: &TensorTrain<T>) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::DimMismatch(format!("{:?} vs {:?}", x.dims(), y.dims())));
    }
    Ok(())
}

/// QR sweep to left- or right-orthogonal form. The represented tensor is
/// unchanged; ranks may shrink to what the unfoldings allow.
pub fn orthogonalize<T: Scalar>(x: &TensorTrain<T>, direction: Orthogonality) -> TensorTrain<T> {
    let mut cores = x.cores.clone();
    let d = cores.len();
    match direction {
        Orthogonality::None => return x.clone(),
        Orthogonality::Left => {
            for k in 0..d - 1 {
                let n = cores[k].n;
                let (q, r) = thin_qr(cores[k].left_unfolding());
                cores[k] = Core::from_left_unfolding(n, &q);
                let next = &cores[k + 1];
                let n1 = next.n;
                cores[k + 1] = Core::from_right_unfolding(n1, &(r * next.right_unfolding()));
            }
        }
        Orthogonality::Right => {
            for k in (1..d).rev() {
                let n = cores[k].n;
                let (q, r) = thin_qr(cores[k].right_unfolding().adjoint());
                cores[k] = Core::from_right_unfolding(n, &q.adjoint());
                let prev = &cores[k - 1];
                let n0 = prev.n;
                cores[k - 1] = Core::from_left_unfolding(n0, &(prev.left_unfolding() * r.adjoint()));
            }
        }
    }
    TensorTrain { cores, orth: direction }
}

/// `Σ_j α_j x_j` with ranks adding.
///
/// Bond indices of the result are term-major: term `j` occupies a
/// contiguous range of each interior bond. The coefficients are folded into
/// the last core.
pub fn linear_combination<T: Scalar>(coeffs: &[T], terms: &[&TensorTrain<T>]) -> Result<TensorTrain<T>> {
    if coeffs.len() != terms.len() || terms.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} terms",
            coeffs.len(),
            terms.len()
        )));
    }
    let first = terms[0];
    let d = first.order();
    let r0 = first.cores[0].left;
    let rd = first.cores[d - 1].right;
    for t in terms {
        check_same_dims(first, t)?;
        if t.cores[0].left != r0 || t.cores[d - 1].right != rd {
            return Err(Error::InvalidArgument("terms have different boundary ranks".into()));
        }
    }
    if d == 1 {
        let mut core = Core::zeros(r0, first.cores[0].n, rd);
        for (&a, t) in coeffs.iter().zip(terms) {
            for (z, &v) in core.data.iter_mut().zip(&t.cores[0].data) {
                *z += a * v;
            }
        }
        return TensorTrain::new(vec![core]);
    }
    // offsets[k][j] = start of term j in bond k
    let bond_offsets = |k: usize| -> Vec<usize> {
        let mut off = vec![0];
        for t in terms {
            off.push(off.last().unwrap() + t.ranks()[k]);
        }
        off
    };
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let n = first.cores[k].n;
        let lo = bond_offsets(k);
        let ro = bond_offsets(k + 1);
        let left = if k == 0 { r0 } else { *lo.last().unwrap() };
        let right = if k == d - 1 { rd } else { *ro.last().unwrap() };
        let mut core = Core::zeros(left, n, right);
        for (j, t) in terms.iter().enumerate() {
            let c = &t.cores[k];
            let a0 = if k == 0 { 0 } else { lo[j] };
            let b0 = if k == d - 1 { 0 } else { ro[j] };
            let w = if k == d - 1 { coeffs[j] } else { T::one() };
            for a in 0..c.left {
                for i in 0..n {
                    for b in 0..c.right {
                        core.set(a0 + a, i, b0 + b, w * c.get(a, i, b));
                    }
                }
            }
        }
        cores.push(core);
    }
    TensorTrain::new(cores)
}

/// Entrywise product with ranks multiplying. Slices are Kronecker products
/// with the first factor's bond index slowest.
pub fn hadamard<T: Scalar>(factors: &[&TensorTrain<T>]) -> Result<TensorTrain<T>> {
    let first = *factors
        .first()
        .ok_or_else(|| Error::InvalidArgument("hadamard product of no factors".into()))?;
    for f in factors {
        check_same_dims(first, f)?;
    }
    let mut acc = first.clone();
    for f in &factors[1..] {
        let cores = acc
            .cores
            .iter()
            .zip(&f.cores)
            .map(|(a, b)| {
                Core::from_fn(a.left * b.left, a.n, a.right * b.right, |l, i, r| {
                    let (la, lb) = (l / b.left, l % b.left);
                    let (ra, rb) = (r / b.right, r % b.right);
                    a.get(la, i, ra) * b.get(lb, i, rb)
                })
            })
            .collect();
        acc = TensorTrain::new(cores)?;
    }
    acc.orth = Orthogonality::None;
    Ok(acc)
}

/// Order-4 operator core `r_{k-1} × n_out × n_in × r_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpCore<T> {
    left: usize,
    n_out: usize,
    n_in: usize,
    right: usize,
    data: Vec<T>,
}

impl<T: Scalar> OpCore<T> {
    pub fn new(left: usize, n_out: usize, n_in: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != left * n_out * n_in * right {
            return Err(Error::DimMismatch(format!(
                "operator core {left}×{n_out}×{n_in}×{right} needs {} entries, got {}",
                left * n_out * n_in * right,
                data.len()
            )));
        }
        Ok(OpCore { left, n_out, n_in, right, data })
    }

    pub fn zeros(left: usize, n_out: usize, n_in: usize, right: usize) -> Self {
        OpCore { left, n_out, n_in, right, data: vec![T::zero(); left * n_out * n_in * right] }
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize, b: usize) -> T {
        self.data[((a * self.n_out + i) * self.n_in + j) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, b: usize, v: T) {
        self.data[((a * self.n_out + i) * self.n_in + j) * self.right + b] = v;
    }

    /// Adds `v · op` into the `(a, b)` bond block, `op` given row-major.
    pub fn add_block(&mut self, a: usize, b: usize, v: T, op: &[T]) {
        assert_eq!(op.len(), self.n_out * self.n_in);
        for i in 0..self.n_out {
            for j in 0..self.n_in {
                let old = self.get(a, i, j, b);
                self.set(a, i, j, b, old + v * op[i * self.n_in + j]);
            }
        }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

/// Contraction of an operator core with a vector core over the input index:
/// `out[(a, β), i, (b, β')] = Σ_j H[a, i, j, b] · B[β, j, β']`, operator bond
/// slowest.
pub fn core_vertical_contraction<T: Scalar>(h: &OpCore<T>, c: &Core<T>) -> Result<Core<T>> {
    if h.n_in != c.n {
        return Err(Error::DimMismatch(format!("operator core takes mode size {}, vector core has {}", h.n_in, c.n)));
    }
    let mut out = Core::zeros(h.left * c.left, h.n_out, h.right * c.right);
    for hl in 0..h.left {
        for i in 0..h.n_out {
            for j in 0..h.n_in {
                for hr in 0..h.right {
                    let w = h.get(hl, i, j, hr);
                    if w == T::zero() {
                        continue;
                    }
                    for a in 0..c.left {
                        for b in 0..c.right {
                            let idx = ((hl * c.left + a) * h.n_out + i) * out.right + hr * c.right + b;
                            out.data[idx] += w * c.get(a, j, b);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Linear operator in tensor-train format.
#[derive(Clone, Debug, PartialEq)]
pub struct TTOperator<T> {
    cores: Vec<OpCore<T>>,
}

impl<T: Scalar> TTOperator<T> {
    pub fn new(cores: Vec<OpCore<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidArgument("an operator needs at least one core".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::InvalidArgument("operator boundary ranks must be 1".into()));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::RankMismatch { bond: k + 1, left: w[0].right, right: w[1].left });
            }
        }
        Ok(TTOperator { cores })
    }

    pub fn identity(dims: &[usize]) -> Self {
        let cores = dims
            .iter()
            .map(|&n| {
                let mut c = OpCore::zeros(1, n, n, 1);
                for i in 0..n {
                    c.set(0, i, i, 0, T::one());
                }
                c
            })
            .collect();
        TTOperator { cores }
    }

    pub fn cores(&self) -> &[OpCore<T>] {
        &self.cores
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn in_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.n_in).collect()
    }

    pub fn out_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.n_out).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![1];
        r.extend(self.cores.iter().map(|c| c.right));
        r
    }

    /// Dense `N_out × N_in` matrix, rows and columns linearized row-major.
    pub fn dense(&self) -> Result<DMatrix<T>> {
        self.dense_with_cap(DENSE_CAP)
    }

    /// [`dense`](Self::dense) with an explicit cap on the number of entries.
    pub fn dense_with_cap(&self, cap: usize) -> Result<DMatrix<T>> {
        let n_out: usize = self.out_dims().iter().product();
        let n_in: usize = self.in_dims().iter().product();
        if n_out * n_in > cap {
            return Err(Error::DenseCap { requested: n_out * n_in, cap });
        }
        // acc[(rows, cols, bond)] built mode by mode
        let mut acc: Vec<T> = vec![T::one()];
        let (mut rows, mut cols, mut bond) = (1usize, 1usize, 1usize);
        for c in &self.cores {
            let mut next = vec![T::zero(); rows * c.n_out * cols * c.n_in * c.right];
            let (nr, nc) = (rows * c.n_out, cols * c.n_in);
            for r in 0..rows {
                for q in 0..cols {
                    for a in 0..bond {
                        let w = acc[(r * cols + q) * bond + a];
                        if w == T::zero() {
                            continue;
                        }
                        for i in 0..c.n_out {
                            for j in 0..c.n_in {
                                for b in 0..c.right {
                                    let idx = ((r * c.n_out + i) * nc + q * c.n_in + j) * c.right + b;
                                    next[idx] += w * c.get(a, i, j, b);
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
            rows = nr;
            cols = nc;
            bond = c.right;
        }
        Ok(from_rows(rows, cols, &acc))
    }

    /// `Hy` as an explicit train; bond `(h, α)` is linearized `h·χ + α`.
    pub fn apply(&self, y: &TensorTrain<T>) -> Result<TensorTrain<T>> {
        if self.in_dims() != y.dims() {
            return Err(Error::DimMismatch(format!(
                "operator input {:?} vs vector {:?}",
                self.in_dims(),
                y.dims()
            )));
        }
        let cores = self
            .cores
            .iter()
            .zip(y.cores())
            .map(|(h, c)| core_vertical_contraction(h, c))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }

    /// `⟨x, H y⟩` by a three-layer contraction, without forming `Hy`.
    pub fn expectation(&self, x: &TensorTrain<T>, y: &TensorTrain<T>) -> Result<T> {
        if self.in_dims() != y.dims() || self.out_dims() != x.dims() {
            return Err(Error::DimMismatch("operator and vectors disagree".into()));
        }
        // e[(α, h, β)] with α from x, h from H, β from y
        let mut e = vec![T::one()];
        let (mut ea, mut eh, mut eb) = (1usize, 1usize, 1usize);
        for ((h, cx), cy) in self.cores.iter().zip(x.cores()).zip(y.cores()) {
            // t1[α, h, j, β'] = Σ_β e[α,h,β] y[β,j,β']
            let (n_in, n_out) = (h.n_in, h.n_out);
            let yr = cy.right;
            let mut t1 = vec![T::zero(); ea * eh * n_in * yr];
            for p in 0..ea * eh {
                for b in 0..eb {
                    let w = e[p * eb + b];
                    if w == T::zero() {
                        continue;
                    }
                    for j in 0..n_in {
                        for b2 in 0..yr {
                            t1[(p * n_in + j) * yr + b2] += w * cy.get(b, j, b2);
                        }
                    }
                }
            }
            // t2[α, i, h', β'] = Σ_{h,j} t1[α,h,j,β'] H[h,i,j,h']
            let hr = h.right;
            let mut t2 = vec![T::zero(); ea * n_out * hr * yr];
            for a in 0..ea {
                for hl in 0..eh {
                    for j in 0..n_in {
                        for i in 0..n_out {
                            for h2 in 0..hr {
                                let w = h.get(hl, i, j, h2);
                                if w == T::zero() {
                                    continue;
                                }
                                for b2 in 0..yr {
                                    t2[((a * n_out + i) * hr + h2) * yr + b2] += w * t1[((a * eh + hl) * n_in + j) * yr + b2];
                                }
                            }
                        }
                    }
                }
            }
            // e'[α', h', β'] = Σ_{α,i} conj(x[α,i,α']) t2[α,i,h',β']
            let xr = cx.right;
            let mut next = vec![T::zero(); xr * hr * yr];
            for a in 0..ea {
                for i in 0..n_out {
                    for a2 in 0..xr {
                        let w = cx.get(a, i, a2).conjugate();
                        if w == T::zero() {
                            continue;
                        }
                        let src = &t2[((a * n_out + i) * hr) * yr..((a * n_out + i) * hr + hr) * yr];
                        let dst = &mut next[a2 * hr * yr..(a2 + 1) * hr * yr];
                        for (o, &s) in dst.iter_mut().zip(src) {
                            *o += w * s;
                        }
                    }
                }
            }
            e = next;
            ea = xr;
            eh = hr;
            eb = yr;
        }
        Ok(e[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use num_complex::Complex64;

    fn dense_inner<T: Scalar>(a: &[T], b: &[T]) -> T {
        a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.conjugate() * *y)
    }

    #[test]
    fn one_core_dense_is_the_core() {
        let x = TensorTrain::<f64>::random(&[5], &[1, 1], 3).unwrap();
        assert_eq!(x.dense().unwrap().data, x.core(0).data());
    }

    #[test]
    fn rank_mismatch_reports_bond() {
        let a = Core::<f64>::zeros(1, 2, 3);
        let b = Core::<f64>::zeros(2, 2, 1);
        match TensorTrain::new(vec![a, b]) {
            Err(Error::RankMismatch { bond: 1, left: 3, right: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluate_matches_dense() {
        let x = TensorTrain::<Complex64>::random_uniform(&[2, 3, 4], 3, 1).unwrap();
        let t = x.dense().unwrap();
        let idx = [1, 2, 3];
        let lin = (1 * 3 + 2) * 4 + 3;
        assert!((x.evaluate(&idx) - t.data[lin]).norm() < 1e-12);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let x = TensorTrain::<f64>::random_uniform(&[4; 11], 1, 1).unwrap();
        assert!(matches!(x.dense(), Err(Error::DenseCap { .. })));
    }

    #[test]
    fn strong_kron_of_chain_is_dense() {
        let x = TensorTrain::<f64>::random(&[2, 3, 2], &[2, 3, 2, 1], 9).unwrap();
        let mut acc = core_chain(x.core(0));
        for c in &x.cores()[1..] {
            acc = strong_kron(&acc, &core_chain(c)).unwrap();
        }
        assert_eq!(acc.shape, vec![2, 2, 3, 2, 1]);
        let direct = x.dense_chain(DENSE_CAP).unwrap();
        assert!(acc.distance(&direct) < 1e-12);
    }

    #[test]
    fn inner_and_norm_match_dense() {
        let x = TensorTrain::<Complex64>::random_uniform(&[3, 2, 4, 2], 3, 1).unwrap();
        let y = TensorTrain::<Complex64>::random_uniform(&[3, 2, 4, 2], 2, 2).unwrap();
        let (dx, dy) = (x.to_vector().unwrap(), y.to_vector().unwrap());
        assert!((inner(&x, &y).unwrap() - dense_inner(&dx, &dy)).norm() < 1e-10);
        let nx = dense_inner(&dx, &dx).re.sqrt();
        assert!((norm(&x) - nx).abs() < 1e-12 * nx);
    }

    #[test]
    fn orthogonal_forms_are_orthogonal() {
        let x = TensorTrain::<Complex64>::random_uniform(&[3, 4, 2, 3], 4, 5).unwrap();
        let l = orthogonalize(&x, Orthogonality::Left);
        let r = orthogonalize(&x, Orthogonality::Right);
        let dx = x.dense().unwrap();
        assert!(l.dense().unwrap().distance(&dx) < 1e-12 * dx.norm());
        assert!(r.dense().unwrap().distance(&dx) < 1e-12 * dx.norm());
        for c in &l.cores()[..3] {
            let u = c.left_unfolding();
            assert!(frobenius(&(u.adjoint() * &u - DMatrix::identity(c.right(), c.right()))) < 1e-12);
        }
        for c in &r.cores()[1..] {
            let u = c.right_unfolding();
            assert!(frobenius(&(&u * u.adjoint() - DMatrix::identity(c.left(), c.left()))) < 1e-12);
        }
        assert_eq!(l.orthogonality(), Orthogonality::Left);
    }

    #[test]
    fn linear_combination_adds_ranks() {
        let x = TensorTrain::<f64>::random_uniform(&[2, 3, 2], 2, 1).unwrap();
        let y = TensorTrain::<f64>::random_uniform(&[2, 3, 2], 3, 2).unwrap();
        let s = linear_combination(&[2.0, -0.5], &[&x, &y]).unwrap();
        assert_eq!(s.ranks(), vec![1, 5, 5, 1]);
        let (dx, dy, ds) = (x.to_vector().unwrap(), y.to_vector().unwrap(), s.to_vector().unwrap());
        for k in 0..ds.len() {
            assert!((ds[k] - (2.0 * dx[k] - 0.5 * dy[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_multiplies_ranks() {
        let x = TensorTrain::<Complex64>::random_uniform(&[2, 3, 2], 2, 1).unwrap();
        let y = TensorTrain::<Complex64>::random_uniform(&[2, 3, 2], 3, 2).unwrap();
        let p = hadamard(&[&x, &y]).unwrap();
        assert_eq!(p.ranks(), vec![1, 6, 6, 1]);
        let (dx, dy, dp) = (x.to_vector().unwrap(), y.to_vector().unwrap(), p.to_vector().unwrap());
        for k in 0..dp.len() {
            assert!((dp[k] - dx[k] * dy[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn from_dense_is_exact_at_full_rank() {
        let x = TensorTrain::<f64>::random_uniform(&[3, 4, 3], 2, 8).unwrap();
        let t = x.dense().unwrap();
        let y = TensorTrain::from_dense(&t, usize::MAX, 0.0).unwrap();
        assert!(y.dense().unwrap().distance(&t) < 1e-12 * t.norm());
        assert!(y.max_rank() <= 3);
    }

    fn random_operator<T: Scalar>(dims: &[usize], rank: usize, seed: u64) -> TTOperator<T> {
        let d = dims.len();
        let cores = (0..d)
            .map(|k| {
                let l = if k == 0 { 1 } else { rank };
                let r = if k == d - 1 { 1 } else { rank };
                let mut rng = stream(seed, 77, 0, k as u64);
                let n = dims[k];
                let data = (0..l * n * n * r).map(|_| T::sample_normal(&mut rng)).collect();
                OpCore::new(l, n, n, r, data).unwrap()
            })
            .collect();
        TTOperator::new(cores).unwrap()
    }

    #[test]
    fn operator_apply_matches_dense() {
        let dims = [2, 3, 2];
        let h = random_operator::<Complex64>(&dims, 2, 4);
        let y = TensorTrain::<Complex64>::random_uniform(&dims, 2, 5).unwrap();
        let hy = h.apply(&y).unwrap();
        assert_eq!(hy.ranks(), vec![1, 4, 4, 1]);
        let hd = h.dense().unwrap();
        let yv = nalgebra::DVector::from_vec(y.to_vector().unwrap());
        let want = hd * yv;
        let got = hy.to_vector().unwrap();
        for k in 0..got.len() {
            assert!((got[k] - want[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn expectation_matches_assembled() {
        let dims = [2, 2, 3];
        let h = random_operator::<Complex64>(&dims, 3, 6);
        let x = TensorTrain::<Complex64>::random_uniform(&dims, 2, 7).unwrap();
        let y = TensorTrain::<Complex64>::random_uniform(&dims, 3, 8).unwrap();
        let a = h.expectation(&x, &y).unwrap();
        let b = inner(&x, &h.apply(&y).unwrap()).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
    }

    #[test]
    fn vertical_contraction_small_cases() {
        let b = TensorTrain::<f64>::random_uniform(&[3, 2], 2, 4).unwrap();
        let id = TTOperator::<f64>::identity(&[3, 2]);
        assert_eq!(&core_vertical_contraction(&id.cores()[0], b.core(0)).unwrap(), b.core(0));
        // one mode: an ordinary matrix-vector product
        let h = random_operator::<f64>(&[3], 1, 2);
        let x = TensorTrain::<f64>::random_uniform(&[3], 1, 5).unwrap();
        let y = core_vertical_contraction(&h.cores()[0], x.core(0)).unwrap();
        let want = h.dense().unwrap() * nalgebra::DVector::from_vec(x.to_vector().unwrap());
        for i in 0..3 {
            assert!((y.get(0, i, 0) - want[i]).abs() < 1e-14);
        }
        assert!(core_vertical_contraction(&h.cores()[0], b.core(1)).is_err());
    }

    #[test]
    fn identity_operator_is_identity() {
        let h = TTOperator::<f64>::identity(&[2, 3]);
        assert!(frobenius(&(h.dense().unwrap() - DMatrix::identity(6, 6))) == 0.0);
    }
}
