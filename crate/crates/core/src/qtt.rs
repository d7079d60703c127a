//! Quantized tensor trains of functions on dyadic grids.
//!
//! A grid with `b_v` bits for variable `v` has `Σ b_v` binary modes, laid
//! out variable by variable with the most significant bit first, so that
//! `x_v = Σ_b i_b 2^{-b}`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contract::sketch_hadamard;
use crate::error::{Error, Result};
use crate::rounding::{rand_round_with, relative_error, round, Truncation};
use crate::scalar::Field;
use crate::sketch::{make_sketch, SketchSpec};
use crate::tt::{hadamard, linear_combination, Core, TensorTrain};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub bits: Vec<usize>,
}

impl DyadicGrid {
    pub fn new(bits: Vec<usize>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b == 0 || b > 52) {
            return Err(Error::InvalidArgument(format!("need 1 to 52 bits per variable, got {bits:?}")));
        }
        Ok(DyadicGrid { bits })
    }

    pub fn uniform(variables: usize, bits: usize) -> Result<Self> {
        Self::new(vec![bits; variables])
    }

    pub fn variables(&self) -> usize {
        self.bits.len()
    }

    pub fn order(&self) -> usize {
        self.bits.iter().sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2; self.order()]
    }

    /// `(variable, bit)` of every mode, bits counted from 1.
    fn modes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.iter().enumerate().flat_map(|(v, &b)| (1..=b).map(move |bit| (v, bit)))
    }

    /// Grid point of a multi-index.
    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; self.variables()];
        for ((v, bit), &i) in self.modes().zip(index) {
            x[v] += i as f64 * (0.5f64).powi(bit as i32);
        }
        x
    }

    /// `Σ_v c_v x_v` decomposed over modes: the weight of bit `i_k = 1`.
    fn weights(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.variables() {
            return Err(Error::DimMismatch(format!("{} variables, {} coefficients", self.variables(), coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(self.modes().map(|(v, bit)| coeffs[v] * (0.5f64).powi(bit as i32)).collect())
    }
}

/// `e^{a + Σ c_v x_v}` as a rank-one train.
pub fn qtt_exp_linear(grid: &DyadicGrid, coeffs: &[f64], a: f64) -> Result<TensorTrain<f64>> {
    let w = grid.weights(coeffs)?;
    let mut cores: Vec<Core<f64>> = w.iter().map(|&t| Core::new(1, 2, 1, vec![1.0, t.exp()])).collect::<Result<_>>()?;
    cores[0].scale(a.exp());
    TensorTrain::new(cores)
}

/// `cos(φ + Σ c_v x_v)` with interior ranks 2, carrying `(cos, sin)` of the
/// partial phase through plane rotations.
pub fn qtt_cos_linear(grid: &DyadicGrid, coeffs: &[f64], phase: f64) -> Result<TensorTrain<f64>> {
    let w = grid.weights(coeffs)?;
    let d = w.len();
    if d == 1 {
        return TensorTrain::new(vec![Core::new(1, 2, 1, vec![phase.cos(), (phase + w[0]).cos()])?]);
    }
    let mut cores = Vec::with_capacity(d);
    cores.push(Core::from_fn(1, 2, 2, |_, i, b| {
        let t = phase + w[0] * i as f64;
        if b == 0 {
            t.cos()
        } else {
            t.sin()
        }
    }));
    for &t in &w[1..d - 1] {
        cores.push(Core::from_fn(2, 2, 2, |a, i, b| {
            let (s, c) = (t * i as f64).sin_cos();
            match (a, b) {
                (0, 0) | (1, 1) => c,
                (0, 1) => s,
                _ => -s,
            }
        }));
    }
    let t = w[d - 1];
    cores.push(Core::from_fn(2, 2, 1, |a, i, _| {
        let (s, c) = (t * i as f64).sin_cos();
        if a == 0 {
            c
        } else {
            -s
        }
    }));
    TensorTrain::new(cores)
}

/// `sin(φ + Σ c_v x_v)`.
pub fn qtt_sin_linear(grid: &DyadicGrid, coeffs: &[f64], phase: f64) -> Result<TensorTrain<f64>> {
    qtt_cos_linear(grid, coeffs, phase - std::f64::consts::FRAC_PI_2)
}

pub fn qtt_constant(grid: &DyadicGrid, value: f64) -> Result<TensorTrain<f64>> {
    qtt_exp_linear(grid, &vec![0.0; grid.variables()], 0.0).map(|t| t.scaled(value))
}

/// Parameters of the three-factor product
///
/// * `f₁ = A e^{-2(x+y+z)} cos(x+y-2z) cos(x-y) + e^x`
/// * `f₂ = A cos(ω₂(x+y-2z)) + e^{-x}`
/// * `f₃ = A cos(ω₃(x+y-2z)) + 1`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadamardConfig {
    pub bits: usize,
    pub amplitude: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl Default for HadamardConfig {
    fn default() -> Self {
        HadamardConfig { bits: 20, amplitude: 0.1, omega2: 65536.0, omega3: 16384.0 / 5f64.sqrt() }
    }
}

impl HadamardConfig {
    /// Direct evaluation of `(f₁, f₂, f₃)`.
    pub fn eval(&self, p: &[f64]) -> [f64; 3] {
        let (x, y, z) = (p[0], p[1], p[2]);
        let l = x + y - 2.0 * z;
        let a = self.amplitude;
        [
            a * (-2.0 * (x + y + z)).exp() * l.cos() * (x - y).cos() + x.exp(),
            a * (self.omega2 * l).cos() + (-x).exp(),
            a * (self.omega3 * l).cos() + 1.0,
        ]
    }
}

#[derive(Clone, Debug)]
pub struct HadamardExperiment {
    pub config: HadamardConfig,
    pub grid: DyadicGrid,
    pub factors: [TensorTrain<f64>; 3],
}

impl HadamardExperiment {
    pub fn factor_refs(&self) -> [&TensorTrain<f64>; 3] {
        [&self.factors[0], &self.factors[1], &self.factors[2]]
    }

    /// The exact product, with ranks equal to the products of factor ranks.
    pub fn product(&self) -> Result<TensorTrain<f64>> {
        hadamard(&self.factor_refs())
    }
}

pub fn build_hadamard_experiment(config: HadamardConfig) -> Result<HadamardExperiment> {
    if config.bits > 20 {
        return Err(Error::InvalidArgument(format!("at most 20 bits per variable, got {}", config.bits)));
    }
    let g = DyadicGrid::uniform(3, config.bits)?;
    let lin = [1.0, 1.0, -2.0];
    let a = config.amplitude;
    let bump = hadamard(&[
        &qtt_exp_linear(&g, &[-2.0, -2.0, -2.0], 0.0)?,
        &qtt_cos_linear(&g, &lin, 0.0)?,
        &qtt_cos_linear(&g, &[1.0, -1.0, 0.0], 0.0)?,
    ])?;
    let f1 = linear_combination(&[a, 1.0], &[&bump, &qtt_exp_linear(&g, &[1.0, 0.0, 0.0], 0.0)?])?;
    let scaled = |w: f64| lin.map(|c| c * w);
    let f2 = linear_combination(
        &[a, 1.0],
        &[&qtt_cos_linear(&g, &scaled(config.omega2), 0.0)?, &qtt_exp_linear(&g, &[-1.0, 0.0, 0.0], 0.0)?],
    )?;
    let f3 = linear_combination(&[a, 1.0], &[&qtt_cos_linear(&g, &scaled(config.omega3), 0.0)?, &qtt_constant(&g, 1.0)?])?;
    Ok(HadamardExperiment { config, grid: g, factors: [f1, f2, f3] })
}

/// One randomized rounding of the product at embedding dimension
/// `target = P·R` with an orthogonal stacked sketch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadamardTrial {
    pub target_rank: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub trial: usize,
    pub rel_error: f64,
    pub wall_time_ms: f64,
}

/// Randomized rounding of the product, sketched through the factors
/// without forming the product's partial contractions.
pub fn hadamard_randomized(
    exp: &HadamardExperiment,
    product: &TensorTrain<f64>,
    target: usize,
    r: usize,
    trial: usize,
    seed: u64,
) -> Result<(TensorTrain<f64>, HadamardTrial)> {
    if r == 0 || target % r != 0 {
        return Err(Error::InvalidArgument(format!("block rank {r} must divide the target rank {target}")));
    }
    let p = target / r;
    let start = Instant::now();
    let spec = SketchSpec::otts(p, r, &exp.grid.dims(), Field::Real, seed);
    let sk = make_sketch::<f64>(&spec)?;
    let w = sketch_hadamard(&exp.factor_refs(), &sk)?;
    let y = rand_round_with(product, &w)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let rel_error = relative_error(product, &y)?;
    Ok((y, HadamardTrial { target_rank: target, r, p, trial, rel_error, wall_time_ms }))
}

/// Deterministic baseline at the same target rank.
pub fn hadamard_deterministic(product: &TensorTrain<f64>, target: usize) -> Result<(TensorTrain<f64>, f64)> {
    let y = round(product, &Truncation::rank(target))?;
    let e = relative_error(product, &y)?;
    Ok((y, e))
}
