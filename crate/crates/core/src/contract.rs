//! Partial contractions of a sketch against tensor trains.
//!
//! For a right-oriented sketch and a train `x`, the partial sketch at bond
//! `k` is `W_k = Ω^{≥k} (X^{≥k})ᵀ`: the rows of all blocks applied to the
//! trailing modes, one column per left bond index of core `k`. They obey
//!
//! ```text
//! W_k[β, α] = Σ_{i, β', α'} G_k[β, i, β'] W_{k+1}[β', α'] X_k[α, i, α']
//! ```
//!
//! with `W_d = 1`. Rows are block-major, `P·ρ_k` of them. The `1/√P` scale
//! is *not* part of the stored matrices; [`PartialSketchSet::sketch`]
//! applies it once.
//!
//! The structured variants reproduce the partial sketches of a linear
//! combination, an operator–vector product or a Hadamard product without
//! forming the result. Their column layouts match
//! [`linear_combination`](crate::tt::linear_combination),
//! [`TTOperator::apply`] and [`hadamard`](crate::tt::hadamard).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{from_rows, to_rows};
use crate::scalar::Scalar;
use crate::sketch::{Orientation, RealizedSketch};
use crate::tt::{Core, OpCore, TTOperator, TensorTrain};

/// Partial sketches `W_0, …, W_d` of one train, indexed by bond.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSketchSet<T: Scalar> {
    orientation: Orientation,
    bonds: Vec<DMatrix<T>>,
    scale: f64,
}

impl<T: Scalar> PartialSketchSet<T> {
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Order of the sketched train.
    pub fn order(&self) -> usize {
        self.bonds.len() - 1
    }

    /// Partial sketch at bond `k` (unscaled), `P·ρ_k × χ_k`.
    pub fn at(&self, k: usize) -> &DMatrix<T> {
        &self.bonds[k]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The full sketch `Ωx` with the global scale applied.
    pub fn sketch(&self) -> DVector<T> {
        let full = match self.orientation {
            Orientation::Right => &self.bonds[0],
            Orientation::Left => &self.bonds[self.order()],
        };
        full.column(0) * T::from_re(self.scale)
    }

    /// Partial sketches of `Σ_j α_j x_j` from those of the terms.
    ///
    /// Interior bonds concatenate the term columns, each scaled by its
    /// coefficient; the outer bond sums them.
    pub fn combine(coeffs: &[T], sets: &[&PartialSketchSet<T>]) -> Result<Self> {
        if coeffs.len() != sets.len() || sets.is_empty() {
            return Err(Error::InvalidArgument(format!("{} coefficients for {} sets", coeffs.len(), sets.len())));
        }
        let first = sets[0];
        let d = first.order();
        for s in sets {
            if s.order() != d || s.orientation != first.orientation || s.scale != first.scale {
                return Err(Error::InvalidArgument("partial sketch sets come from different sketches".into()));
            }
        }
        // bond that collects the sum rather than the concatenation
        let outer = match first.orientation {
            Orientation::Right => 0,
            Orientation::Left => d,
        };
        let inner_boundary = match first.orientation {
            Orientation::Right => d,
            Orientation::Left => 0,
        };
        let mut bonds = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let rows = first.bonds[k].nrows();
            if k == outer || (d == 0 && k == inner_boundary) {
                let mut acc = DMatrix::<T>::zeros(rows, first.bonds[k].ncols());
                for (&a, s) in coeffs.iter().zip(sets) {
                    acc += &s.bonds[k] * a;
                }
                bonds.push(acc);
            } else if k == inner_boundary {
                // χ = 1 on the rank-one boundary: the coefficient sits in the
                // outermost core, so the boundary copies are left unscaled
                bonds.push(first.bonds[k].clone());
            } else {
                let cols: usize = sets.iter().map(|s| s.bonds[k].ncols()).sum();
                let mut m = DMatrix::<T>::zeros(rows, cols);
                let mut off = 0;
                for (&a, s) in coeffs.iter().zip(sets) {
                    let w = &s.bonds[k];
                    let scaled = if first.orientation == Orientation::Right { w * a } else { w.clone() };
                    m.view_mut((0, off), (rows, w.ncols())).copy_from(&scaled);
                    off += w.ncols();
                }
                bonds.push(m);
            }
        }
        Ok(PartialSketchSet { orientation: first.orientation, bonds, scale: first.scale })
    }
}

fn check_dims<T: Scalar>(sk: &RealizedSketch<T>, dims: &[usize]) -> Result<()> {
    if sk.dims() != dims {
        return Err(Error::DimMismatch(format!("sketch modes {:?} vs train modes {dims:?}", sk.dims())));
    }
    Ok(())
}

fn stack<T: Scalar>(per_block: Vec<Vec<DMatrix<T>>>, d: usize) -> Vec<DMatrix<T>> {
    (0..=d)
        .map(|k| {
            let cols = per_block[0][k].ncols();
            let rows: usize = per_block.iter().map(|b| b[k].nrows()).sum();
            let mut m = DMatrix::<T>::zeros(rows, cols);
            let mut off = 0;
            for b in &per_block {
                m.view_mut((off, 0), (b[k].nrows(), cols)).copy_from(&b[k]);
                off += b[k].nrows();
            }
            m
        })
        .collect()
}

/// Runs `step` right to left over each block and stacks the results.
fn right_sweep<T: Scalar, F>(sk: &RealizedSketch<T>, step: F) -> Vec<DMatrix<T>>
where
    F: Fn(usize, &Core<T>, &DMatrix<T>) -> DMatrix<T> + Sync,
{
    let d = sk.order();
    let per_block: Vec<Vec<DMatrix<T>>> = sk
        .blocks()
        .par_iter()
        .map(|block| {
            let mut ws = vec![DMatrix::<T>::zeros(0, 0); d + 1];
            ws[d] = DMatrix::from_element(1, 1, T::one());
            for k in (0..d).rev() {
                ws[k] = step(k, &block[k], &ws[k + 1]);
            }
            ws
        })
        .collect();
    stack(per_block, d)
}

/// `T1 = G ×₃ W`, returned as the `ρ_k × (n · cols(W))` row-major reshape.
fn absorb_right<T: Scalar>(g: &Core<T>, w: &DMatrix<T>) -> DMatrix<T> {
    let t = g.left_unfolding() * w;
    from_rows(g.left(), g.n() * w.ncols(), &to_rows(&t))
}

fn require_right<T: Scalar>(sk: &RealizedSketch<T>) -> Result<()> {
    if sk.orientation() != Orientation::Right {
        return Err(Error::InvalidArgument("this contraction needs a right-oriented sketch".into()));
    }
    Ok(())
}

fn require_plain<T: Scalar>(x: &TensorTrain<T>) -> Result<()> {
    if x.is_block() {
        return Err(Error::InvalidArgument("sketched trains need boundary ranks 1".into()));
    }
    Ok(())
}

/// Right-to-left partial sketches of a plain train.
pub fn partial_contractions<T: Scalar>(x: &TensorTrain<T>, sk: &RealizedSketch<T>) -> Result<PartialSketchSet<T>> {
    require_right(sk)?;
    require_plain(x)?;
    check_dims(sk, &x.dims())?;
    let bonds = right_sweep(sk, |k, g, w| absorb_right(g, w) * x.core(k).right_unfolding().transpose());
    Ok(PartialSketchSet { orientation: Orientation::Right, bonds, scale: sk.scale() })
}

/// Left-to-right partial sketches against a left-oriented sketch.
/// `at(k)` is `L_{≤k} X^{≤k}`, shape `P·ρ_k × χ_k`.
pub fn left_partial_contractions<T: Scalar>(
    x: &TensorTrain<T>,
    sk: &RealizedSketch<T>,
) -> Result<PartialSketchSet<T>> {
    if sk.orientation() != Orientation::Left {
        return Err(Error::InvalidArgument("left partial contractions need a left-oriented sketch".into()));
    }
    require_plain(x)?;
    check_dims(sk, &x.dims())?;
    let d = x.order();
    let per_block: Vec<Vec<DMatrix<T>>> = sk
        .blocks()
        .par_iter()
        .map(|block| {
            let mut ls = vec![DMatrix::<T>::from_element(1, 1, T::one())];
            for k in 0..d {
                let (g, c) = (&block[k], x.core(k));
                let a = &ls[k] * c.right_unfolding();
                let a = from_rows(g.left() * g.n(), c.right(), &to_rows(&a));
                ls.push(g.left_unfolding().transpose() * a);
            }
            ls
        })
        .collect();
    Ok(PartialSketchSet { orientation: Orientation::Left, bonds: stack(per_block, d), scale: sk.scale() })
}

/// `Ωx` for a plain train.
pub fn sketch_apply<T: Scalar>(x: &TensorTrain<T>, sk: &RealizedSketch<T>) -> Result<DVector<T>> {
    Ok(match sk.orientation() {
        Orientation::Right => partial_contractions(x, sk)?.sketch(),
        Orientation::Left => left_partial_contractions(x, sk)?.sketch(),
    })
}

/// Partial sketches of `Σ_j α_j x_j` without assembling the sum.
pub fn sketch_linear_combination<T: Scalar>(
    coeffs: &[T],
    terms: &[&TensorTrain<T>],
    sk: &RealizedSketch<T>,
) -> Result<PartialSketchSet<T>> {
    let sets = terms.iter().map(|x| partial_contractions(x, sk)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&PartialSketchSet<T>> = sets.iter().collect();
    PartialSketchSet::combine(coeffs, &refs)
}

/// Partial sketches of `Hy`. Column `(h, α)` is linearized `h·χ + α`.
///
/// Each mode contracts the sketch core first, then the operator core, then
/// the vector core.
pub fn sketch_matvec<T: Scalar>(
    h: &TTOperator<T>,
    y: &TensorTrain<T>,
    sk: &RealizedSketch<T>,
) -> Result<PartialSketchSet<T>> {
    require_right(sk)?;
    require_plain(y)?;
    if h.in_dims() != y.dims() {
        return Err(Error::DimMismatch(format!("operator input {:?} vs vector {:?}", h.in_dims(), y.dims())));
    }
    check_dims(sk, &h.out_dims())?;
    let bonds = right_sweep(sk, |k, g, w| matvec_step(g, &h.cores()[k], y.core(k), w));
    Ok(PartialSketchSet { orientation: Orientation::Right, bonds, scale: sk.scale() })
}

fn matvec_step<T: Scalar>(g: &Core<T>, op: &OpCore<T>, yc: &Core<T>, w: &DMatrix<T>) -> DMatrix<T> {
    let (rho, n_out, n_in) = (g.left(), op.n_out(), op.n_in());
    let (hl, hr) = (op.left(), op.right());
    let (yl, yr) = (yc.left(), yc.right());
    // t1[β, i, h', a'] = Σ_β' G[β,i,β'] W[β', h'·χ' + a']
    let t1 = to_rows(&(g.left_unfolding() * w));
    // t2[β, h, j, a'] = Σ_{i,h'} t1[β,i,h',a'] H[h,i,j,h']
    let mut t2 = vec![T::zero(); rho * hl * n_in * yr];
    for b in 0..rho {
        for i in 0..n_out {
            for h2 in 0..hr {
                let src = &t1[((b * n_out + i) * hr + h2) * yr..((b * n_out + i) * hr + h2 + 1) * yr];
                for h1 in 0..hl {
                    for j in 0..n_in {
                        let c = op.get(h1, i, j, h2);
                        if c == T::zero() {
                            continue;
                        }
                        let dst = &mut t2[((b * hl + h1) * n_in + j) * yr..((b * hl + h1) * n_in + j + 1) * yr];
                        for (o, &s) in dst.iter_mut().zip(src) {
                            *o += c * s;
                        }
                    }
                }
            }
        }
    }
    // W_k[(β, h), a] = Σ_{j,a'} t2[(β,h), (j,a')] Y[a, j, a']
    let t2 = from_rows(rho * hl, n_in * yr, &t2);
    let out = t2 * yc.right_unfolding().transpose();
    from_rows(rho, hl * yl, &to_rows(&out))
}

/// Partial sketches of the entrywise product of `factors`, with the bond
/// index of the first factor slowest.
pub fn sketch_hadamard<T: Scalar>(factors: &[&TensorTrain<T>], sk: &RealizedSketch<T>) -> Result<PartialSketchSet<T>> {
    require_right(sk)?;
    if factors.is_empty() {
        return Err(Error::InvalidArgument("hadamard sketch of no factors".into()));
    }
    for f in factors {
        require_plain(f)?;
        check_dims(sk, &f.dims())?;
    }
    let bonds = right_sweep(sk, |k, g, w| {
        let cores: Vec<&Core<T>> = factors.iter().map(|f| f.core(k)).collect();
        hadamard_step(g, &cores, w)
    });
    Ok(PartialSketchSet { orientation: Orientation::Right, bonds, scale: sk.scale() })
}

fn hadamard_step<T: Scalar>(g: &Core<T>, cores: &[&Core<T>], w: &DMatrix<T>) -> DMatrix<T> {
    let n = g.n();
    let rho_r = g.right();
    let rights: Vec<usize> = cores.iter().map(|c| c.right()).collect();
    let lefts: Vec<usize> = cores.iter().map(|c| c.left()).collect();
    // u[β', i, a_1..a_j, b_{j+1}..b_J], starting from W replicated over i
    let wr = to_rows(w);
    let post0: usize = rights.iter().product();
    let mut u = Vec::with_capacity(rho_r * n * post0);
    for b in 0..rho_r {
        for _ in 0..n {
            u.extend_from_slice(&wr[b * post0..(b + 1) * post0]);
        }
    }
    let mut pre = 1usize;
    for (j, c) in cores.iter().enumerate() {
        let post: usize = rights[j + 1..].iter().product();
        let (al, bl) = (lefts[j], rights[j]);
        let mut next = vec![T::zero(); rho_r * n * pre * al * post];
        for b in 0..rho_r {
            for i in 0..n {
                let base_in = (b * n + i) * pre * bl * post;
                let base_out = (b * n + i) * pre * al * post;
                for p in 0..pre {
                    for a in 0..al {
                        let dst0 = base_out + (p * al + a) * post;
                        for bb in 0..bl {
                            let coef = c.get(a, i, bb);
                            if coef == T::zero() {
                                continue;
                            }
                            let src0 = base_in + (p * bl + bb) * post;
                            for q in 0..post {
                                let v = u[src0 + q];
                                next[dst0 + q] += coef * v;
                            }
                        }
                    }
                }
            }
        }
        u = next;
        pre *= al;
    }
    // W_k[β, a] = Σ_{β', i} G[β, i, β'] u[β', i, a]; reorder G to β × (β', i)
    let gm = DMatrix::from_fn(g.left(), rho_r * n, |b, col| g.get(b, col % n, col / n));
    gm * from_rows(rho_r * n, pre, &u)
}
