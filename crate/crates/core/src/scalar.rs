//! Real and complex scalars behind one trait.
//!
//! Every algorithm in the crate is written once against [`Scalar`]; the two
//! implementations are `f64` and [`Complex64`]. The field constant `p`
//! (2 for ℝ, 1 for ℂ) shows up in the moment formulas and the parameter
//! calculators, so it is surfaced here as [`Field::p`].

use std::fmt::Debug;

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Which field a tensor lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// `p_F`: 2 for the reals, 1 for the complex numbers.
    pub fn p(self) -> f64 {
        match self {
            Field::Real => 2.0,
            Field::Complex => 1.0,
        }
    }

    /// Number of `f64` words per scalar in serialized form.
    pub fn parts(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Field::Real => 0,
            Field::Complex => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Field> {
        match tag {
            0 => Some(Field::Real),
            1 => Some(Field::Complex),
            _ => None,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// Scalar type of a tensor train.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Default + Send + Sync + Debug + 'static {
    const FIELD: Field;

    /// Draw from the standard normal over the field: `N(0,1)` for ℝ and
    /// `(Z₁ + iZ₂)/√2` for ℂ, so that `E|g|² = 1` in both cases.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Unit-modulus random sign: `±1` for ℝ, `(±1 ± i)/√2` for ℂ.
    fn sample_sign<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;

    fn write_parts(self, out: &mut Vec<f64>);
    fn read_parts(parts: &[f64]) -> Self;

    fn from_re(x: f64) -> Self {
        Self::from_real(x)
    }

    /// `|z|²`.
    fn abs2(self) -> f64 {
        self.modulus_squared()
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn sample_sign<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    fn from_c64(z: Complex64) -> Self {
        z.re
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn write_parts(self, out: &mut Vec<f64>) {
        out.push(self);
    }

    fn read_parts(parts: &[f64]) -> Self {
        parts[0]
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn sample_sign<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn to_c64(self) -> Complex64 {
        self
    }

    fn write_parts(self, out: &mut Vec<f64>) {
        out.push(self.re);
        out.push(self.im);
    }

    fn read_parts(parts: &[f64]) -> Self {
        Complex64::new(parts[0], parts[1])
    }
}
