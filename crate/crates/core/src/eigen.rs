//! Sketched Rayleigh-Ritz ground-state search for operators in TT format.
//!
//! One sketch per restart cycle does three jobs: it rounds the new Krylov
//! vector, it supplies the sketched Gram-Schmidt coefficients, and it forms
//! the small Ritz problem `C†D y = λ y` from `C = [Ωb₁ … Ωb_m]` and
//! `D = [ΩHb₁ … ΩHb_m]`.
//!
//! Spin-chain Hamiltonians ([`tto_tfim`], [`tto_heisenberg`]) come with a
//! dense oracle for small chains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contract::{partial_contractions, sketch_matvec, PartialSketchSet};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, general_eig, hermitian_eigenvalues, lstsq, thin_qr};
use crate::rng::{mix, module};
use crate::rounding::{rand_round_with, round, Truncation};
use crate::scalar::Scalar;
use crate::sketch::{make_sketch, RealizedSketch, SketchSpec, Variant};
use crate::tt::{inner, linear_combination, OpCore, TTOperator, TensorTrain};

/// Dense operators up to this many entries are diagonalized by the oracle
/// (chains of 12 spins).
pub const DENSE_ORACLE_CAP: usize = 1 << 24;

/// Sketched bases worse conditioned than this abort the run.
pub const MAX_BASIS_CONDITION: f64 = 1e10;

/// A new direction whose sketched norm falls below this fraction of
/// `‖ΩHb‖` ends the cycle: the Krylov space is (numerically) invariant.
pub const BREAKDOWN_RATIO: f64 = 1e-14;

const I2: [f64; 4] = [1.0, 0.0, 0.0, 1.0];
const X: [f64; 4] = [0.0, 1.0, 1.0, 0.0];
const Z: [f64; 4] = [1.0, 0.0, 0.0, -1.0];
// iY, real
const IY: [f64; 4] = [0.0, 1.0, -1.0, 0.0];
const O: [f64; 4] = [0.0; 4];

fn scaled(op: [f64; 4], a: f64) -> [f64; 4] {
    op.map(|v| v * a)
}

/// Chain `w_L W ⋯ W w_R` of a lower-triangular operator-valued matrix `W`
/// with `w_L` its last row and `w_R` its first column.
fn mpo_chain<T: Scalar>(d: usize, w: &[Vec<[f64; 4]>]) -> Result<TTOperator<T>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("spin chains need d ≥ 2, got {d}")));
    }
    let b = w.len();
    let cores = (0..d)
        .map(|k| {
            let rows = if k == 0 { b - 1..b } else { 0..b };
            let cols = if k == d - 1 { 0..1 } else { 0..b };
            let mut core = OpCore::zeros(rows.len(), 2, 2, cols.len());
            for (a, row) in rows.clone().enumerate() {
                for c in cols.clone() {
                    let op: Vec<T> = w[row][c].iter().map(|&v| T::from_re(v)).collect();
                    core.add_block(a, c, T::one(), &op);
                }
            }
            core
        })
        .collect();
    TTOperator::new(cores)
}

/// Transverse-field Ising chain `−J Σ Z_i Z_{i+1} − g Σ X_i`, open
/// boundaries, bond rank 3.
pub fn tto_tfim<T: Scalar>(d: usize, j: f64, g: f64) -> Result<TTOperator<T>> {
    let w = vec![vec![I2, O, O], vec![Z, O, O], vec![scaled(X, -g), scaled(Z, -j), I2]];
    mpo_chain(d, &w)
}

/// XYZ Heisenberg chain `Σ (Jx X_iX_{i+1} + Jy Y_iY_{i+1} + Jz Z_iZ_{i+1}) + h Σ Z_i`,
/// open boundaries, bond rank 5. Real, since `Y⊗Y = −(iY)⊗(iY)`.
pub fn tto_heisenberg<T: Scalar>(d: usize, jx: f64, jy: f64, jz: f64, h: f64) -> Result<TTOperator<T>> {
    let w = vec![
        vec![I2, O, O, O, O],
        vec![X, O, O, O, O],
        vec![IY, O, O, O, O],
        vec![Z, O, O, O, O],
        vec![scaled(Z, h), scaled(X, jx), scaled(IY, -jy), scaled(Z, jz), I2],
    ];
    mpo_chain(d, &w)
}

/// All eigenvalues of a Hermitian operator, ascending, by dense
/// diagonalization. Refuses operators above [`DENSE_ORACLE_CAP`] entries.
pub fn dense_eigenvalues<T: Scalar>(h: &TTOperator<T>) -> Result<Vec<f64>> {
    Ok(hermitian_eigenvalues(&h.dense_with_cap(DENSE_ORACLE_CAP)?))
}

pub fn dense_ground_energy<T: Scalar>(h: &TTOperator<T>) -> Result<f64> {
    Ok(dense_eigenvalues(h)?[0])
}

/// `⟨x|H|x⟩ / ⟨x|x⟩`, exact.
pub fn true_rayleigh_quotient<T: Scalar>(h: &TTOperator<T>, x: &TensorTrain<T>) -> Result<f64> {
    let num = h.expectation(x, x)?.to_c64().re;
    let den = inner(x, x)?.to_c64().re;
    if den == 0.0 {
        return Err(Error::InvalidArgument("Rayleigh quotient of the zero vector".into()));
    }
    Ok(num / den)
}

/// `‖Ω(Hx − λx)‖₂` from partial contractions, never forming `Hx`.
pub fn estimate_true_residual<T: Scalar>(
    h: &TTOperator<T>,
    x: &TensorTrain<T>,
    lambda: f64,
    sk: &RealizedSketch<T>,
) -> Result<f64> {
    let hx = sketch_matvec(h, x, sk)?;
    let wx = partial_contractions(x, sk)?;
    let diff = PartialSketchSet::combine(&[T::one(), T::from_re(-lambda)], &[&hx, &wx])?;
    Ok(diff.sketch().norm())
}

/// Eigenpairs of the sketched Ritz problem.
#[derive(Clone, Debug, PartialEq)]
pub struct RitzSolution {
    /// Sorted by real part, ascending.
    pub eigenvalues: Vec<Complex64>,
    /// `y_j`, scaled so that `‖C y_j‖ = 1` with the largest entry real positive.
    pub vectors: Vec<DVector<Complex64>>,
    /// `‖D y_j − λ_j C y_j‖₂`.
    pub residuals: Vec<f64>,
    /// `C†D`.
    pub reduced: DMatrix<Complex64>,
}

fn to_c64_matrix<T: Scalar>(m: &DMatrix<T>) -> DMatrix<Complex64> {
    m.map(|z| z.to_c64())
}

/// Solves `C†D y = λ y` through a QR factorization of `C`.
pub fn ritz_solve<T: Scalar>(c: &DMatrix<T>, d: &DMatrix<T>) -> Result<RitzSolution> {
    let (rows, m) = c.shape();
    if d.shape() != (rows, m) {
        return Err(Error::DimMismatch(format!("C is {rows}×{m}, D is {}×{}", d.nrows(), d.ncols())));
    }
    if m == 0 || m > rows {
        return Err(Error::InvalidArgument(format!("need 1 ≤ m ≤ rows, got m={m} with {rows} rows")));
    }
    let cond = condition_number(c)?;
    if cond > MAX_BASIS_CONDITION {
        return Err(Error::IllConditioned { cond, limit: MAX_BASIS_CONDITION });
    }
    let (cc, dc) = (to_c64_matrix(c), to_c64_matrix(d));
    let (q, r) = thin_qr(cc.clone());
    let reduced = r
        .solve_upper_triangular(&(q.adjoint() * &dc))
        .ok_or_else(|| Error::Decomposition("triangular solve with a singular R".into()))?;
    let mut pairs = general_eig(&reduced)?;
    pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut out = RitzSolution { eigenvalues: vec![], vectors: vec![], residuals: vec![], reduced };
    for (lambda, y) in pairs {
        let mut y = y.clone() / Complex64::new((&cc * &y).norm(), 0.0);
        let lead = y.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Complex64::new(1.0, 0.0));
        if lead.norm() > 0.0 {
            y *= lead.conj() / lead.norm();
        }
        let res = (&dc * &y - &cc * &y * lambda).norm();
        out.eigenvalues.push(lambda);
        out.vectors.push(y);
        out.residuals.push(res);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighRitzConfig {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "R")]
    pub r: usize,
    /// Basis vectors per cycle; a cycle ends with a restart.
    pub m: usize,
    /// Gram-Schmidt window `k`: each new vector is sketch-orthogonalized
    /// against the previous `k` basis vectors.
    pub window: usize,
    /// TT ranks of the basis vectors in the first cycle.
    pub ranks: usize,
    /// Ranks double at every restart up to this cap.
    pub max_ranks: usize,
    pub restarts: usize,
    /// Stop once `r₁ ≤ tol·|λ₁|`.
    pub tol: f64,
    /// Evaluate exact Rayleigh quotients (through Gram matrices of the
    /// basis) and an independent residual estimate at every iteration, and
    /// pick restart vectors by the exact quotient.
    pub track_true: bool,
    pub seed: u64,
}

fn default_variant() -> Variant {
    Variant::Otts
}

impl RayleighRitzConfig {
    /// OTTS sketch, full window, fixed ranks, 5 restarts.
    pub fn new(p: usize, r: usize, m: usize, ranks: usize, seed: u64) -> Self {
        RayleighRitzConfig {
            variant: Variant::Otts,
            p,
            r,
            m,
            window: m,
            ranks,
            max_ranks: ranks,
            restarts: 5,
            tol: 1e-10,
            track_true: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.p == 0 || self.r == 0 {
            return bad("P and R must be positive".into());
        }
        if self.m == 0 || self.m > self.p * self.r {
            return bad(format!("need 1 ≤ m ≤ PR = {}, got m = {}", self.p * self.r, self.m));
        }
        if self.window == 0 || self.window > self.m {
            return bad(format!("need 1 ≤ k ≤ m, got k = {}", self.window));
        }
        if self.ranks == 0 || self.max_ranks < self.ranks {
            return bad(format!("need 1 ≤ ranks ≤ max_ranks, got {} and {}", self.ranks, self.max_ranks));
        }
        Ok(())
    }
}

/// One Krylov step, in the quantities of a convergence plot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Global 1-based iteration count across restarts.
    pub iter: usize,
    pub cycle: usize,
    pub basis_size: usize,
    pub rank: usize,
    pub lambda_sketched: f64,
    pub quotient_true: Option<f64>,
    pub resid_sketched: f64,
    pub resid_true_est: Option<f64>,
    /// Condition number of `C*C`.
    pub gram_cond: f64,
    /// `‖C*C − I‖_max`.
    pub gram_offset: f64,
    /// Sketched and true norms of the newest vector before normalization.
    pub sketched_norm: f64,
    pub true_norm: f64,
}

#[derive(Clone, Debug)]
pub struct RitzResult<T: Scalar> {
    /// Ritz values of the last cycle, ascending by real part.
    pub eigenvalues: Vec<Complex64>,
    pub coefficients: Vec<DVector<Complex64>>,
    pub residuals: Vec<f64>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
    /// Sketch-normalized basis of the last cycle.
    pub basis: Vec<TensorTrain<T>>,
    pub history: Vec<IterationRecord>,
    /// Best rounded Ritz vector over all cycles, unit norm.
    pub best: TensorTrain<T>,
    pub best_quotient: Option<f64>,
    /// Whether the residual tolerance was met.
    pub converged: bool,
}

impl<T: Scalar> RitzResult<T> {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0].re
    }

    /// Ritz vector `Σ_i y_i b_i` of the last cycle, at full rank.
    pub fn ritz_vector(&self, j: usize) -> Result<TensorTrain<T>> {
        let y = self
            .coefficients
            .get(j)
            .ok_or_else(|| Error::InvalidArgument(format!("no Ritz pair {j}")))?;
        combine_basis(&self.basis, y)
    }
}

fn coeffs_of<T: Scalar>(y: &DVector<Complex64>) -> Vec<T> {
    y.iter().map(|&z| T::from_c64(z)).collect()
}

fn combine_basis<T: Scalar>(basis: &[TensorTrain<T>], y: &DVector<Complex64>) -> Result<TensorTrain<T>> {
    let refs: Vec<&TensorTrain<T>> = basis.iter().collect();
    linear_combination(&coeffs_of::<T>(y), &refs)
}

/// Per basis vector: partial sketches, `ΩHb`, and the same for the
/// independent estimation sketch.
struct Sketched<T: Scalar> {
    w: PartialSketchSet<T>,
    hw: PartialSketchSet<T>,
    est: Option<(DVector<T>, DVector<T>)>,
}

struct Cycle<T: Scalar> {
    basis: Vec<TensorTrain<T>>,
    sk: Vec<Sketched<T>>,
    c: DMatrix<T>,
    d: DMatrix<T>,
    ritz: RitzSolution,
}

struct Run<'a, T: Scalar> {
    h: &'a TTOperator<T>,
    cfg: &'a RayleighRitzConfig,
    est: Option<RealizedSketch<T>>,
    history: Vec<IterationRecord>,
}

fn columns<T: Scalar>(cols: &[DVector<T>]) -> DMatrix<T> {
    DMatrix::from_columns(cols)
}

impl<T: Scalar> Run<'_, T> {
    fn sketch_vector(&self, b: &TensorTrain<T>, sk: &RealizedSketch<T>) -> Result<Sketched<T>> {
        let w = partial_contractions(b, sk)?;
        let hw = sketch_matvec(self.h, b, sk)?;
        let est = match &self.est {
            Some(e) => Some((partial_contractions(b, e)?.sketch(), sketch_matvec(self.h, b, e)?.sketch())),
            None => None,
        };
        Ok(Sketched { w, hw, est })
    }

    fn cycle(&mut self, cycle: usize, v0: &TensorTrain<T>, ranks: usize) -> Result<Cycle<T>> {
        let cfg = self.cfg;
        let spec = SketchSpec::new(cfg.variant, cfg.p, cfg.r, &v0.dims(), T::FIELD, mix(&[cfg.seed, module::EIGEN, cycle as u64]));
        let sk = make_sketch::<T>(&spec)?;
        let iteration = self.history.len();

        let w0 = partial_contractions(v0, &sk)?;
        let n0 = w0.sketch().norm();
        if !(n0 > 0.0) {
            return Err(Error::Breakdown { iteration, reason: "starting vector has zero sketch".into() });
        }
        let mut norms = (n0, crate::tt::norm(v0));
        let mut basis = vec![v0.clone().scaled(T::from_re(1.0 / n0))];
        let mut sketched = vec![self.sketch_vector(&basis[0], &sk)?];
        let (mut cs, mut ds) = (vec![sketched[0].w.sketch()], vec![sketched[0].hw.sketch()]);
        // exact Gram matrices ⟨b_i, b_j⟩ and ⟨b_i, H b_j⟩
        let mut gram = Vec::<Vec<T>>::new();
        let mut gram_h = Vec::<Vec<T>>::new();

        loop {
            let j = basis.len();
            if cfg.track_true {
                let b = &basis[j - 1];
                let mut row = Vec::with_capacity(j);
                let mut row_h = Vec::with_capacity(j);
                for bi in &basis {
                    row.push(inner(bi, b)?);
                    row_h.push(self.h.expectation(bi, b)?);
                }
                gram.push(row);
                gram_h.push(row_h);
            }
            let (c, d) = (columns(&cs), columns(&ds));
            let ritz = ritz_solve(&c, &d).map_err(|e| match e {
                Error::IllConditioned { cond, .. } => Error::Breakdown {
                    iteration: iteration + j,
                    reason: format!("sketched basis condition number {cond:.3e}"),
                },
                other => other,
            })?;
            self.record(cycle, ranks, &ritz, &c, &sketched, &gram, &gram_h, norms)?;
            let lambda = ritz.eigenvalues[0].re;
            let done = j == cfg.m || ritz.residuals[0] <= cfg.tol * lambda.abs();
            if done {
                return Ok(Cycle { basis, sk: sketched, c, d, ritz });
            }

            // sketched truncated Gram-Schmidt against the last `window` vectors
            let lo = j.saturating_sub(cfg.window);
            let target = &ds[j - 1];
            let alpha = lstsq(&columns(&cs[lo..j]), &DMatrix::from_column_slice(target.len(), 1, target.as_slice()), 1e-12)?;
            let hb = self.h.apply(&basis[j - 1])?;
            let mut coeffs = vec![T::one()];
            coeffs.extend(alpha.iter().map(|&a| -a));
            let mut terms = vec![&hb];
            terms.extend(basis[lo..j].iter());
            let mut sets = vec![&sketched[j - 1].hw];
            sets.extend(sketched[lo..j].iter().map(|s| &s.w));
            let w = PartialSketchSet::combine(&coeffs, &sets)?;
            let v = rand_round_with(&linear_combination(&coeffs, &terms)?, &w)?;
            let v = round(&v, &Truncation::rank(ranks))?;
            let nv = partial_contractions(&v, &sk)?.sketch().norm();
            if !(nv > BREAKDOWN_RATIO * target.norm()) {
                // invariant Krylov space: keep what we have
                return Ok(Cycle { basis, sk: sketched, c, d, ritz });
            }
            norms = (nv, crate::tt::norm(&v));
            let b = v.scaled(T::from_re(1.0 / nv));
            let s = self.sketch_vector(&b, &sk)?;
            cs.push(s.w.sketch());
            ds.push(s.hw.sketch());
            basis.push(b);
            sketched.push(s);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        cycle: usize,
        rank: usize,
        ritz: &RitzSolution,
        c: &DMatrix<T>,
        sketched: &[Sketched<T>],
        gram: &[Vec<T>],
        gram_h: &[Vec<T>],
        norms: (f64, f64),
    ) -> Result<()> {
        let j = c.ncols();
        let cc = to_c64_matrix(c);
        let g = cc.adjoint() * &cc;
        let evs = hermitian_eigenvalues(&g);
        let gram_cond = if evs[0] > 0.0 { evs[j - 1] / evs[0] } else { f64::INFINITY };
        let gram_offset = (g - DMatrix::<Complex64>::identity(j, j)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lambda = ritz.eigenvalues[0].re;
        let y = &ritz.vectors[0];
        let yt: Vec<Complex64> = coeffs_of::<T>(y).iter().map(|z| z.to_c64()).collect();
        let quotient_true = if self.cfg.track_true {
            // Hermitian forms from the stored upper triangles
            let entry = |m: &[Vec<T>], a: usize, b: usize| {
                if a <= b {
                    m[b][a].to_c64()
                } else {
                    m[a][b].to_c64().conj()
                }
            };
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for a in 0..j {
                for b in 0..j {
                    let w = yt[a].conj() * yt[b];
                    num += w * entry(gram_h, a, b);
                    den += w * entry(gram, a, b);
                }
            }
            Some(num.re / den.re)
        } else {
            None
        };
        let resid_true_est = match sketched.iter().map(|s| s.est.as_ref()).collect::<Option<Vec<_>>>() {
            Some(est) => {
                let mut acc = DVector::<Complex64>::zeros(est[0].0.len());
                for (k, (w, hw)) in est.iter().enumerate() {
                    acc += (hw.map(|z| z.to_c64()) - w.map(|z| z.to_c64()) * Complex64::new(lambda, 0.0)) * yt[k];
                }
                Some(acc.norm())
            }
            None => None,
        };
        self.history.push(IterationRecord {
            iter: self.history.len() + 1,
            cycle,
            basis_size: j,
            rank,
            lambda_sketched: lambda,
            quotient_true,
            resid_sketched: ritz.residuals[0],
            resid_true_est,
            gram_cond,
            gram_offset,
            sketched_norm: norms.0,
            true_norm: norms.1,
        });
        Ok(())
    }
}

/// Restarted sketched Rayleigh-Ritz for the lowest eigenpair of a
/// Hermitian `h`, starting from `v0`.
pub fn sketched_rayleigh_ritz<T: Scalar>(
    h: &TTOperator<T>,
    v0: &TensorTrain<T>,
    cfg: &RayleighRitzConfig,
) -> Result<RitzResult<T>> {
    cfg.validate()?;
    if h.in_dims() != v0.dims() || h.out_dims() != v0.dims() {
        return Err(Error::DimMismatch(format!("operator {:?} and start vector {:?}", h.in_dims(), v0.dims())));
    }
    let est = if cfg.track_true {
        let spec = SketchSpec::new(cfg.variant, cfg.p, cfg.r, &v0.dims(), T::FIELD, mix(&[cfg.seed, module::EIGEN, u64::MAX]));
        Some(make_sketch::<T>(&spec)?)
    } else {
        None
    };
    let mut run = Run { h, cfg, est, history: vec![] };
    let mut start = v0.clone();
    let mut ranks = cfg.ranks;
    let mut best: Option<(f64, TensorTrain<T>, Option<f64>)> = None;
    let mut last = None;
    let mut converged = false;
    for cycle in 0..=cfg.restarts {
        let out = run.cycle(cycle, &start, ranks)?;
        let y = &out.ritz.vectors[0];
        let coeffs = coeffs_of::<T>(y);
        let sets: Vec<&PartialSketchSet<T>> = out.sk.iter().map(|s| &s.w).collect();
        let w = PartialSketchSet::combine(&coeffs, &sets)?;
        let x = rand_round_with(&combine_basis(&out.basis, y)?, &w)?;
        let x = round(&x, &Truncation::rank(ranks))?;
        let nx = crate::tt::norm(&x);
        let x = x.scaled(T::from_re(1.0 / nx));
        let quotient = if cfg.track_true { Some(true_rayleigh_quotient(h, &x)?) } else { None };
        let score = quotient.unwrap_or(out.ritz.eigenvalues[0].re);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, x, quotient));
        }
        let lambda = out.ritz.eigenvalues[0].re;
        converged = out.ritz.residuals[0] <= cfg.tol * lambda.abs();
        last = Some(out);
        if converged {
            break;
        }
        start = best.as_ref().map(|b| b.1.clone()).expect("at least one cycle ran");
        ranks = (2 * ranks).min(cfg.max_ranks);
    }
    let out = last.expect("at least one cycle ran");
    let (_, best, best_quotient) = best.expect("at least one cycle ran");
    Ok(RitzResult {
        eigenvalues: out.ritz.eigenvalues,
        coefficients: out.ritz.vectors,
        residuals: out.ritz.residuals,
        c: out.c,
        d: out.d,
        basis: out.basis,
        history: run.history,
        best,
        best_quotient,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scalar::Field;

    fn assert_spectrum(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn two_site_models() {
        assert_spectrum(&dense_eigenvalues(&tto_tfim::<f64>(2, 1.0, 0.0).unwrap()).unwrap(), &[-1.0, -1.0, 1.0, 1.0]);
        assert_spectrum(&dense_eigenvalues(&tto_tfim::<f64>(2, 0.0, 1.0).unwrap()).unwrap(), &[-2.0, 0.0, 0.0, 2.0]);
        // singlet at -3, triplet at +1
        assert_spectrum(
            &dense_eigenvalues(&tto_heisenberg::<f64>(2, 1.0, 1.0, 1.0, 0.0).unwrap()).unwrap(),
            &[-3.0, 1.0, 1.0, 1.0],
        );
        assert!(tto_tfim::<f64>(1, 1.0, 1.0).is_err());
    }

    fn kron(ops: &[&DMatrix<f64>]) -> DMatrix<f64> {
        ops.iter().skip(1).fold(ops[0].clone(), |acc, o| acc.kronecker(o))
    }

    #[test]
    fn heisenberg_matches_local_terms() {
        let d = 5;
        let (jx, jy, jz, h) = (0.7, -0.4, 1.3, 0.25);
        let id = DMatrix::<f64>::identity(2, 2);
        let x = DMatrix::from_row_slice(2, 2, &X);
        let z = DMatrix::from_row_slice(2, 2, &Z);
        let iy = DMatrix::from_row_slice(2, 2, &IY);
        let site = |op: &DMatrix<f64>, k: usize| {
            let ops: Vec<&DMatrix<f64>> = (0..d).map(|q| if q == k { op } else { &id }).collect();
            kron(&ops)
        };
        let mut want = DMatrix::<f64>::zeros(1 << d, 1 << d);
        for k in 0..d - 1 {
            want += site(&x, k) * site(&x, k + 1) * jx;
            want -= site(&iy, k) * site(&iy, k + 1) * jy;
            want += site(&z, k) * site(&z, k + 1) * jz;
        }
        for k in 0..d {
            want += site(&z, k) * h;
        }
        let got = tto_heisenberg::<f64>(d, jx, jy, jz, h).unwrap().dense().unwrap();
        assert!((&got - &want).norm() < 1e-12);
        assert!((&got - got.transpose()).norm() < 1e-13);
    }

    #[test]
    fn ritz_on_planted_spectrum() {
        let mut rng = stream(1, module::EXPERIMENT, 0, 0);
        let c = DMatrix::<f64>::from_fn(12, 4, |_, _| f64::sample_normal(&mut rng));
        let (q, _) = thin_qr(c.clone());
        let mu = [3.0, -1.0, 0.5, 2.0];
        let d = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&mu));
        let sol = ritz_solve(&q, &d).unwrap();
        let got: Vec<f64> = sol.eigenvalues.iter().map(|z| z.re).collect();
        assert_spectrum(&got, &[-1.0, 0.5, 2.0, 3.0]);
        assert!(sol.residuals.iter().all(|&r| r < 1e-12));

        // general well-conditioned C with D = C M
        let m = DMatrix::<f64>::from_fn(4, 4, |i, j| if i == j { i as f64 } else { 0.1 * (i + 2 * j) as f64 });
        let sol = ritz_solve(&c, &(&c * &m)).unwrap();
        let mc = m.map(|v| Complex64::new(v, 0.0));
        for (l, y) in sol.eigenvalues.iter().zip(&sol.vectors) {
            assert!((&mc * y - y * *l).norm() < 1e-10 * y.norm());
        }
    }

    #[test]
    fn ritz_single_column_is_rayleigh_quotient() {
        let c = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, -1.0]);
        let d = DMatrix::from_column_slice(3, 1, &[0.5, 1.0, 3.0]);
        let sol = ritz_solve(&c, &d).unwrap();
        let want = c.dot(&d) / c.dot(&c);
        assert!((sol.eigenvalues[0].re - want).abs() < 1e-14);
        assert!(ritz_solve(&DMatrix::<f64>::zeros(3, 2), &DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn identity_operator_converges_at_once() {
        let dims = [2; 6];
        let h = TTOperator::<f64>::identity(&dims);
        let v0 = TensorTrain::<f64>::random_uniform(&dims, 3, 2).unwrap();
        let mut cfg = RayleighRitzConfig::new(2, 4, 4, 4, 0);
        cfg.restarts = 0;
        let out = sketched_rayleigh_ritz(&h, &v0, &cfg).unwrap();
        assert!((out.ground_energy() - 1.0).abs() < 1e-12);
        assert!(out.residuals[0] < 1e-10 && out.converged);
        assert_eq!(out.history.len(), 1);
        assert!((true_rayleigh_quotient(&h, &out.best).unwrap() - 1.0).abs() < 1e-12);
        let sk = make_sketch::<f64>(&SketchSpec::otts(2, 4, &dims, Field::Real, 1)).unwrap();
        assert!(estimate_true_residual(&h, &out.best, 1.0, &sk).unwrap() < 1e-12);
    }

    #[test]
    fn quotient_matches_dense() {
        let d = 8;
        let h = tto_heisenberg::<f64>(d, 1.0, 0.5, 0.8, 0.3).unwrap();
        let x = TensorTrain::<f64>::random_uniform(&[2; 8], 3, 4).unwrap();
        let hd = h.dense().unwrap();
        let xv = DVector::from_vec(x.to_vector().unwrap());
        let want = xv.dot(&(&hd * &xv)) / xv.dot(&xv);
        assert!((true_rayleigh_quotient(&h, &x).unwrap() - want).abs() < 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn history_is_consistent() {
        let d = 6;
        let h = tto_tfim::<f64>(d, 1.0, 1.2).unwrap();
        let v0 = TensorTrain::<f64>::random_kronecker(&[2; 6], 3).unwrap();
        let mut cfg = RayleighRitzConfig::new(2, 8, 6, 8, 5);
        cfg.restarts = 1;
        let out = sketched_rayleigh_ritz(&h, &v0, &cfg).unwrap();
        // stored residuals follow from the stored sketches
        let cc = to_c64_matrix(&out.c);
        let dc = to_c64_matrix(&out.d);
        for ((l, y), r) in out.eigenvalues.iter().zip(&out.coefficients).zip(&out.residuals) {
            assert!(((&dc * y - &cc * y * *l).norm() - r).abs() < 1e-12);
        }
        // the quotient tracked through Gram matrices equals the direct one
        let last = out.history.last().unwrap();
        let x = out.ritz_vector(0).unwrap();
        let q = true_rayleigh_quotient(&h, &x).unwrap();
        assert!((last.quotient_true.unwrap() - q).abs() < 1e-10);
        let exact = dense_ground_energy(&h).unwrap();
        assert!(out.best_quotient.unwrap() >= exact - 1e-10);
        // rerun is bit-for-bit identical
        let again = sketched_rayleigh_ritz(&h, &v0, &cfg).unwrap();
        assert_eq!(out.history, again.history);
    }

    #[test]
    fn config_checks() {
        assert!(RayleighRitzConfig::new(2, 2, 5, 4, 0).validate().is_err());
        let mut cfg = RayleighRitzConfig::new(2, 4, 4, 4, 0);
        cfg.window = 0;
        assert!(cfg.validate().is_err());
    }
}
