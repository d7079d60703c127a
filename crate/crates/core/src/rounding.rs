//! Rank reduction of tensor trains.
//!
//! * [`round`]: orthogonalize left to right, then truncate right to left
//!   with SVDs. Quasi-optimal; the result is right-orthogonal.
//! * [`rand_round`]: sketch the trailing cores once with a stacked sketch,
//!   then sweep left to right taking QRs of the sketched cores. The result
//!   is left-orthogonal and has ranks `P·ρ_k`.
//! * [`stta`]: two-sided streaming approximation from a left and a right
//!   sketch. Linear in `x` up to the final pseudo-inverses.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::contract::{left_partial_contractions, partial_contractions, PartialSketchSet};
use crate::error::{Error, Result};
use crate::linalg::{from_rows, pinv_trunc, rank_for_tolerance, svd, thin_qr, to_rows};
use crate::scalar::{Field, Scalar};
use crate::sketch::{make_sketch, Orientation, RealizedSketch, SketchSpec};
use crate::tt::{norm, orthogonalize, Core, Orthogonality, TensorTrain};

/// Rank caps and tolerance for deterministic rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    /// Caps for the interior bonds `1, …, d-1`; `None` means uncapped.
    pub max_ranks: Option<Vec<usize>>,
    /// Uniform cap applied on top of `max_ranks`.
    pub max_rank: usize,
    /// Relative Frobenius tolerance; 0 keeps every non-zero direction.
    pub rel_tol: f64,
}

impl Truncation {
    pub fn rank(r: usize) -> Self {
        Truncation { max_ranks: None, max_rank: r, rel_tol: 0.0 }
    }

    pub fn per_bond(ranks: Vec<usize>) -> Self {
        Truncation { max_ranks: Some(ranks), max_rank: usize::MAX, rel_tol: 0.0 }
    }

    pub fn tolerance(eps: f64) -> Self {
        Truncation { max_ranks: None, max_rank: usize::MAX, rel_tol: eps }
    }

    fn cap(&self, bond: usize) -> usize {
        let per = self.max_ranks.as_ref().map_or(usize::MAX, |v| v[bond - 1]);
        per.min(self.max_rank)
    }
}

/// Result of deterministic rounding.
#[derive(Clone, Debug)]
pub struct Rounded<T> {
    pub tt: TensorTrain<T>,
    /// Squared Frobenius norm discarded at each interior bond `1, …, d-1`.
    pub discarded: Vec<f64>,
}

/// Deterministic rounding.
pub fn round<T: Scalar>(x: &TensorTrain<T>, trunc: &Truncation) -> Result<TensorTrain<T>> {
    Ok(round_with_report(x, trunc)?.tt)
}

/// Deterministic rounding, also returning the discarded energy per bond.
/// The total squared error equals the sum of the discarded parts.
pub fn round_with_report<T: Scalar>(x: &TensorTrain<T>, trunc: &Truncation) -> Result<Rounded<T>> {
    let d = x.order();
    if let Some(v) = &trunc.max_ranks {
        if v.len() + 1 != d {
            return Err(Error::DimMismatch(format!("{d} modes need {} rank caps, got {}", d - 1, v.len())));
        }
    }
    let ortho = orthogonalize(x, Orthogonality::Left);
    let mut cores = ortho.into_cores();
    let total = cores[d - 1].norm();
    let delta = if d > 1 { trunc.rel_tol * total / ((d - 1) as f64).sqrt() } else { 0.0 };
    let mut discarded = vec![0.0; d.saturating_sub(1)];
    for k in (1..d).rev() {
        let n = cores[k].n();
        let dec = svd(cores[k].right_unfolding())?;
        let keep = rank_for_tolerance(&dec.s, delta, trunc.cap(k));
        discarded[k - 1] = dec.s[keep..].iter().map(|s| s * s).sum();
        let dec = dec.truncate(keep);
        cores[k] = Core::from_right_unfolding(n, &dec.vt);
        let mut us = dec.u;
        for (j, &s) in dec.s.iter().enumerate() {
            let mut col = us.column_mut(j);
            col *= T::from_re(s);
        }
        let n0 = cores[k - 1].n();
        cores[k - 1] = Core::from_left_unfolding(n0, &(cores[k - 1].left_unfolding() * us));
    }
    let tt = TensorTrain::new(cores)?.with_orthogonality(Orthogonality::Right);
    Ok(Rounded { tt, discarded })
}

/// Randomize-then-orthogonalize rounding with a fresh set of partial
/// sketches drawn from `sk`.
pub fn rand_round<T: Scalar>(x: &TensorTrain<T>, sk: &RealizedSketch<T>) -> Result<TensorTrain<T>> {
    let w = partial_contractions(x, sk)?;
    rand_round_with(x, &w)
}

/// Like [`rand_round`], but checks that the requested interior ranks are
/// the ones the sketch produces.
pub fn rand_round_to<T: Scalar>(x: &TensorTrain<T>, targets: &[usize], sk: &RealizedSketch<T>) -> Result<TensorTrain<T>> {
    let d = x.order();
    if targets.len() + 1 != d {
        return Err(Error::DimMismatch(format!("{d} modes need {} target ranks, got {}", d - 1, targets.len())));
    }
    for (k, &t) in targets.iter().enumerate() {
        let m = sk.stacked_rank(k + 1);
        if t != m {
            return Err(Error::InvalidArgument(format!(
                "target rank {t} at bond {} does not match the sketch dimension P·ρ = {m}",
                k + 1
            )));
        }
    }
    rand_round(x, sk)
}

/// Randomize-then-orthogonalize rounding from precomputed partial sketches
/// of `x` (for instance those assembled by the structured sketching
/// routines).
pub fn rand_round_with<T: Scalar>(x: &TensorTrain<T>, w: &PartialSketchSet<T>) -> Result<TensorTrain<T>> {
    let d = x.order();
    if w.orientation() != Orientation::Right || w.order() != d {
        return Err(Error::InvalidArgument("partial sketches do not belong to this train".into()));
    }
    let mut cores = x.cores().to_vec();
    for k in 0..d.saturating_sub(1) {
        let wk = w.at(k + 1);
        if wk.ncols() != cores[k].right() {
            return Err(Error::RankMismatch { bond: k + 1, left: cores[k].right(), right: wk.ncols() });
        }
        let n = cores[k].n();
        let unfold = cores[k].left_unfolding();
        let z = &unfold * wk.transpose();
        let (q, _) = thin_qr(z);
        let m = q.adjoint() * unfold;
        cores[k] = Core::from_left_unfolding(n, &q);
        let n1 = cores[k + 1].n();
        cores[k + 1] = Core::from_right_unfolding(n1, &(m * cores[k + 1].right_unfolding()));
    }
    Ok(TensorTrain::new(cores)?.with_orthogonality(Orthogonality::Left))
}

/// Default cutoff of the pseudo-inverse in [`stta`], relative to `σ_max`.
pub const PINV_REL_TOL: f64 = 1e-12;

/// The linear part of the streaming approximation: `S_k = L_{≤k} X^{≤k} R_{>k}ᵀ`
/// for the interior bonds and `Z_k = L_{≤k-1} X R_{>k}` for every mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SttaSketch<T> {
    /// `S_1, …, S_{d-1}`.
    pub s: Vec<DMatrix<T>>,
    /// `Z_1, …, Z_d`.
    pub z: Vec<Core<T>>,
}

impl<T: Scalar> SttaSketch<T> {
    /// `a·self + b·other`, entry by entry.
    pub fn axpby(&self, a: T, other: &SttaSketch<T>, b: T) -> Result<SttaSketch<T>> {
        if self.s.len() != other.s.len() || self.z.len() != other.z.len() {
            return Err(Error::DimMismatch("sketches of different orders".into()));
        }
        let s = self.s.iter().zip(&other.s).map(|(x, y)| x * a + y * b).collect();
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(x, y)| {
                let data = x.data().iter().zip(y.data()).map(|(&u, &v)| u * a + v * b).collect();
                Core::new(x.left(), x.n(), x.right(), data)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SttaSketch { s, z })
    }
}

fn check_single_block<T: Scalar>(sk: &RealizedSketch<T>, what: &str) -> Result<()> {
    if sk.num_blocks() != 1 {
        return Err(Error::InvalidArgument(format!("{what} sketch must have a single block")));
    }
    Ok(())
}

/// The sketches `S_k`, `Z_k` of `x`.
pub fn stta_sketch<T: Scalar>(
    x: &TensorTrain<T>,
    left: &RealizedSketch<T>,
    right: &RealizedSketch<T>,
) -> Result<SttaSketch<T>> {
    check_single_block(left, "left")?;
    check_single_block(right, "right")?;
    let d = x.order();
    let lp = left_partial_contractions(x, left)?;
    let rp = partial_contractions(x, right)?;
    let s = (1..d).map(|k| lp.at(k) * rp.at(k).transpose()).collect();
    let z = (0..d)
        .map(|k| {
            let c = x.core(k);
            let a = lp.at(k) * c.right_unfolding();
            let a = from_rows(a.nrows() * c.n(), c.right(), &to_rows(&a));
            Core::from_left_unfolding(c.n(), &(a * rp.at(k + 1).transpose()))
        })
        .collect();
    Ok(SttaSketch { s, z })
}

/// Cores `Y_k = Z_k S_k^†` for `k < d` and `Y_d = Z_d`.
pub fn stta_assemble<T: Scalar>(sketch: &SttaSketch<T>, rel_tol: f64) -> Result<TensorTrain<T>> {
    let d = sketch.z.len();
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let z = &sketch.z[k];
        if k + 1 < d {
            let pinv = pinv_trunc(&sketch.s[k], rel_tol)?;
            cores.push(Core::from_left_unfolding(z.n(), &(z.left_unfolding() * pinv)));
        } else {
            cores.push(z.clone());
        }
    }
    TensorTrain::new(cores)
}

/// Two-sided streaming approximation.
pub fn stta<T: Scalar>(
    x: &TensorTrain<T>,
    left: &RealizedSketch<T>,
    right: &RealizedSketch<T>,
    rel_tol: f64,
) -> Result<TensorTrain<T>> {
    stta_assemble(&stta_sketch(x, left, right)?, rel_tol)
}

/// Gaussian TT sketch pair for [`stta`] with left ranks `targets` and right
/// ranks `targets + oversampling` at the interior bonds.
pub fn stta_sketches<T: Scalar>(
    dims: &[usize],
    targets: &[usize],
    oversampling: &[usize],
    seed: u64,
) -> Result<(RealizedSketch<T>, RealizedSketch<T>)> {
    let d = dims.len();
    if targets.len() + 1 != d || oversampling.len() + 1 != d {
        return Err(Error::DimMismatch(format!("{d} modes need {} target ranks and oversamplings", d - 1)));
    }
    if d == 1 {
        let one = SketchSpec::gaussian_tt(vec![1], dims, T::FIELD, seed);
        return Ok((
            make_sketch(&one.clone().with_orientation(Orientation::Left))?,
            make_sketch(&SketchSpec { seed: seed ^ 1, ..one })?,
        ));
    }
    let right_ranks: Vec<usize> = targets.iter().zip(oversampling).map(|(r, l)| r + l).collect();
    // bond 0 of the right sketch and bond d of the left one are never used
    let mut rr = vec![right_ranks[0]];
    rr.extend_from_slice(&right_ranks);
    // left-oriented rank lists run from the right end
    let mut lr = vec![targets[d - 2]];
    lr.extend(targets.iter().rev());
    let left = SketchSpec::gaussian_tt(lr, dims, T::FIELD, seed).with_orientation(Orientation::Left);
    let right = SketchSpec::gaussian_tt(rr, dims, T::FIELD, seed.wrapping_add(0x5151));
    Ok((make_sketch(&left)?, make_sketch(&right)?))
}

/// Rounding parameters as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingRequest {
    /// Interior target ranks.
    #[serde(default)]
    pub targets: Option<Vec<usize>>,
    /// Relative tolerance for deterministic rounding.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Sketch for the randomized algorithm.
    #[serde(default)]
    pub sketch: Option<SketchSpec>,
    /// Extra right-sketch rank for the two-sided algorithm; defaults to
    /// the target rank.
    #[serde(default)]
    pub oversampling: Option<Vec<usize>>,
}

impl RoundingRequest {
    pub fn truncation(&self) -> Truncation {
        Truncation {
            max_ranks: self.targets.clone(),
            max_rank: usize::MAX,
            rel_tol: self.eps.unwrap_or(0.0),
        }
    }

    pub fn field(&self) -> Option<Field> {
        self.sketch.as_ref().map(|s| s.field)
    }
}

/// Relative error `‖x − y‖/‖x‖`, accurate to machine precision relative to
/// the difference.
pub fn relative_error<T: Scalar>(x: &TensorTrain<T>, y: &TensorTrain<T>) -> Result<f64> {
    let diff = crate::tt::linear_combination(&[T::one(), -T::one()], &[x, y])?;
    Ok(norm(&diff) / norm(x))
}

/// `X_s/‖X_s‖ + ε·X_n/‖X_n‖` with random plain trains `X_s` of rank
/// `signal_rank` and `X_n` of rank `noise_rank`, the synthetic rounding
/// family. The sum has rank `signal_rank + noise_rank`.
pub fn signal_plus_noise<T: Scalar>(
    dims: &[usize],
    signal_rank: usize,
    noise_rank: usize,
    eps: f64,
    seed: u64,
) -> Result<TensorTrain<T>> {
    use crate::rng::{mix, module};
    let xs = TensorTrain::<T>::random_uniform(dims, signal_rank, mix(&[seed, module::RANDOM_TT, 0]))?;
    let xn = TensorTrain::<T>::random_uniform(dims, noise_rank, mix(&[seed, module::RANDOM_TT, 1]))?;
    let a = T::from_re(1.0 / norm(&xs));
    let b = T::from_re(eps / norm(&xn));
    crate::tt::linear_combination(&[a, b], &[&xs, &xn])
}
