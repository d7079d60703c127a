use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gamma::GammaTable;
use super::partial_trace::partial_trace;
use super::stats::mean_se;
use crate::contract::sketch_apply;
use crate::error::{Error, Result};
use crate::rng::{mix, module, stream};
use crate::scalar::{Field, Scalar};
use crate::sketch::{make_sketch, SketchSpec};
use crate::tt::TensorTrain;

/// Samples are split into this many fixed chunks so results do not depend
/// on the thread count.
const CHUNKS: usize = 64;

fn chunked<V: Send>(samples: usize, f: impl Fn(usize, usize) -> Vec<V> + Sync + Send) -> Vec<V> {
    let chunks: Vec<Vec<V>> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let lo = c * samples / CHUNKS;
            let hi = (c + 1) * samples / CHUNKS;
            f(c, hi - lo)
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn per_sample<V: Send>(samples: usize, f: impl Fn(usize) -> Result<V> + Sync + Send) -> Result<Vec<V>> {
    (0..samples).into_par_iter().map(f).collect()
}

/// Monte-Carlo mean of a possibly complex quantity, with per-component
/// standard errors, against a predicted value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub estimate: Complex64,
    /// Standard error of the real part in `re`, of the imaginary part in `im`.
    pub std_error: Complex64,
    pub predicted: Complex64,
}

impl MomentEstimate {
    fn from_values(values: &[Complex64], predicted: Complex64) -> Self {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        let (mr, sr) = mean_se(&re);
        let (mi, si) = mean_se(&im);
        MomentEstimate { estimate: Complex64::new(mr, mi), std_error: Complex64::new(sr, si), predicted }
    }

    /// Both components within `k` standard errors of the prediction.
    pub fn within(&self, k: f64) -> bool {
        let diff = self.estimate - self.predicted;
        diff.re.abs() <= k * self.std_error.re && diff.im.abs() <= k * self.std_error.im
    }

    /// Largest deviation in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let diff = self.estimate - self.predicted;
        let z = |d: f64, s: f64| if d == 0.0 { 0.0 } else { d.abs() / s };
        z(diff.re, self.std_error.re).max(z(diff.im, self.std_error.im))
    }
}

/// The two fourth-moment identities of a Gaussian matrix `G` (`R × n`,
/// entries `N_F(0, 1/R)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMoments {
    /// `E[Tr(GAG*) · conj Tr(GBG*)]`.
    pub trace_product: MomentEstimate,
    /// `E[Tr(GAG* (GBG*)*)]`.
    pub hilbert_schmidt: MomentEstimate,
}

fn as_c64<T: Scalar>(a: &DMatrix<T>) -> DMatrix<Complex64> {
    a.map(|z| z.to_c64())
}

/// Closed forms for [`MatrixMoments`].
pub fn predicted_matrix_moments<T: Scalar>(r: usize, a: &DMatrix<T>, b: &DMatrix<T>) -> (Complex64, Complex64) {
    let rf = r as f64;
    let (a, b) = (as_c64(a), as_c64(b));
    let (ta, tb) = (a.trace(), b.trace());
    match T::FIELD {
        Field::Real => {
            let ah = (&a + a.transpose()) * Complex64::new(0.5, 0.0);
            let bh = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
            let tp = ta * tb + (&ah * &bh).trace() * (2.0 / rf);
            let hs = (ta * tb + (&a * &b).trace()) / rf + (&a * b.transpose()).trace();
            (tp, hs)
        }
        Field::Complex => {
            let abh = (&a * b.adjoint()).trace();
            (ta * tb.conj() + abh / rf, ta * tb.conj() / rf + abh)
        }
    }
}

/// Monte-Carlo check of the matrix moment identities.
pub fn mc_moment_matrix<T: Scalar>(
    r: usize,
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    samples: usize,
    seed: u64,
) -> Result<MatrixMoments> {
    let n = a.nrows();
    if !a.is_square() || b.shape() != a.shape() {
        return Err(Error::DimMismatch(format!("need two square matrices of one size, got {:?} and {:?}", a.shape(), b.shape())));
    }
    if samples < 1000 || r == 0 {
        return Err(Error::InvalidArgument(format!("need R ≥ 1 and at least 1000 samples, got R={r}, {samples}")));
    }
    let scale = T::from_re(1.0 / (r as f64).sqrt());
    let values = chunked(samples, |c, count| {
        let mut rng = stream(seed, module::MONTE_CARLO, c as u64, 0);
        (0..count)
            .map(|_| {
                let g = DMatrix::<T>::from_fn(r, n, |_, _| T::sample_normal(&mut rng) * scale);
                let ga = &g * a * g.adjoint();
                let gb = &g * b * g.adjoint();
                let tp = ga.trace().to_c64() * gb.trace().to_c64().conj();
                let hs = (&ga * gb.adjoint()).trace().to_c64();
                (tp, hs)
            })
            .collect()
    });
    let (pt, ph) = predicted_matrix_moments(r, a, b);
    let tp: Vec<Complex64> = values.iter().map(|v| v.0).collect();
    let hs: Vec<Complex64> = values.iter().map(|v| v.1).collect();
    Ok(MatrixMoments {
        trace_product: MomentEstimate::from_values(&tp, pt),
        hilbert_schmidt: MomentEstimate::from_values(&hs, ph),
    })
}

/// Fourth moment `E[Tr(Ω S Ω*)²]` of one Gaussian TT block with `R` rows
/// against `Σ_I γ_I ‖Tr_I S‖²_F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorMoment {
    pub estimate: f64,
    pub std_error: f64,
    pub predicted: f64,
    /// Equality is expected over ℂ, an upper bound over ℝ.
    pub equality: bool,
}

impl TensorMoment {
    pub fn consistent(&self, k: f64) -> bool {
        if self.equality {
            (self.estimate - self.predicted).abs() <= k * self.std_error
        } else {
            self.estimate <= self.predicted + k * self.std_error
        }
    }

    /// `(predicted − estimate)/SE`: positive when the bound has room.
    pub fn slack(&self) -> f64 {
        (self.predicted - self.estimate) / self.std_error
    }
}

pub const MAX_MOMENT_DIM: usize = 256;

/// `Σ_I γ_I ‖Tr_I S‖²_F`.
pub fn gamma_weighted_traces<T: Scalar>(table: &GammaTable, s: &DMatrix<T>, dims: &[usize]) -> Result<f64> {
    let mut err = None;
    let v = table.weighted_sum(|m| match partial_trace(s, dims, m) {
        Ok(t) => t.norm_squared(),
        Err(e) => {
            err = Some(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

pub fn mc_moment_tensor<T: Scalar>(
    dims: &[usize],
    r: usize,
    s: &DMatrix<T>,
    samples: usize,
    seed: u64,
) -> Result<TensorMoment> {
    let d = dims.len();
    let n: usize = dims.iter().product();
    if d == 0 || d > 8 || n > MAX_MOMENT_DIM {
        return Err(Error::InvalidArgument(format!("tensor moments need d ≤ 8 and N ≤ {MAX_MOMENT_DIM}")));
    }
    if s.shape() != (n, n) {
        return Err(Error::DimMismatch(format!("S is {:?}, expected {n}×{n}", s.shape())));
    }
    let table = GammaTable::new(d, r, T::FIELD)?;
    let predicted = gamma_weighted_traces(&table, s, dims)?;
    let values = per_sample(samples, |i| {
        let spec = SketchSpec::tts(1, r, dims, T::FIELD, mix(&[seed, module::MONTE_CARLO, i as u64]));
        let omega = make_sketch::<T>(&spec)?.dense()?;
        let t = (&omega * s * omega.adjoint()).trace().to_c64().re;
        Ok(t * t)
    })?;
    let (estimate, std_error) = mean_se(&values);
    Ok(TensorMoment { estimate, std_error, predicted, equality: T::FIELD == Field::Complex })
}

/// Monte-Carlo mean of a real quantity against a target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub target: f64,
}

impl MeanEstimate {
    pub fn within(&self, k: f64) -> bool {
        (self.mean - self.target).abs() <= k * self.std_error
    }
}

/// `E‖Ωx‖²` over independent draws of the sketch family `spec` (its seed
/// is replaced per draw), against `‖x‖²`.
pub fn isotropy_mc<T: Scalar>(x: &TensorTrain<T>, spec: &SketchSpec, samples: usize, seed: u64) -> Result<MeanEstimate> {
    let values = per_sample(samples, |i| {
        let spec = SketchSpec { seed: mix(&[seed, module::MONTE_CARLO, i as u64]), ..spec.clone() };
        let sk = make_sketch::<T>(&spec)?;
        Ok(sketch_apply(x, &sk)?.norm_squared())
    })?;
    let (mean, std_error) = mean_se(&values);
    Ok(MeanEstimate { mean, std_error, target: crate::tt::norm(x).powi(2) })
}

/// `n × n` matrix of standard normal entries.
pub fn random_gaussian_matrix<T: Scalar>(n: usize, seed: u64) -> DMatrix<T> {
    let mut rng = stream(seed, module::EXPERIMENT, 0, 0);
    DMatrix::<T>::from_fn(n, n, |_, _| T::sample_normal(&mut rng))
}

/// Random positive semidefinite `BB*` with Gaussian `B`.
pub fn random_psd<T: Scalar>(n: usize, seed: u64) -> DMatrix<T> {
    let b = random_gaussian_matrix::<T>(n, seed);
    &b * b.adjoint()
}
