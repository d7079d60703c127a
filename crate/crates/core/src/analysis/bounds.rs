//! Parameter calculators for the embedding guarantees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn half_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1], got {v}")))
    }
}

/// `(1 + p/R)^d − 1`, the subspace-oblivious cap on `C_Q(R)`.
pub fn cq_upper_bound(d: usize, r: usize, field: Field) -> f64 {
    // exp_m1/ln_1p keeps precision when p/R is tiny
    (d as f64 * (field.p() / r as f64).ln_1p()).exp_m1()
}

/// Right-hand side `4ε⁻²[8C²r + (1 + C²) log(2r/δ)]` of the injection
/// condition on the number of blocks.
pub fn osi_bound(eps: f64, delta: f64, r: usize, c: f64) -> Result<f64> {
    open_unit("ε", eps)?;
    open_unit("δ", delta)?;
    if r == 0 || !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("need r ≥ 1 and C ≥ 0, got r={r}, C={c}")));
    }
    let (rf, c2) = (r as f64, c * c);
    Ok(4.0 / (eps * eps) * (8.0 * c2 * rf + (1.0 + c2) * (2.0 * rf / delta).ln()))
}

/// Smallest block count `P` meeting [`osi_bound`].
pub fn osi_sufficient_p(eps: f64, delta: f64, r: usize, c: f64) -> Result<usize> {
    Ok(osi_bound(eps, delta, r, c)?.ceil() as usize)
}

/// Approximation constant `C_δ = 1 + α⁻¹(1 + √(((1+p/R)^d − 1)/(Pδ/2)))`
/// of the sketched range finder, bounding the squared Frobenius error
/// relative to the best rank-`r` error. `P` may be fractional.
pub fn rsvd_constant(alpha: f64, delta: f64, p: f64, r: usize, d: usize, field: Field) -> Result<f64> {
    half_open_unit("α", alpha)?;
    half_open_unit("δ", delta)?;
    if !(p > 0.0) || r == 0 {
        return Err(Error::InvalidArgument(format!("need P > 0 and R ≥ 1, got P={p}, R={r}")));
    }
    let rad = (cq_upper_bound(d, r, field) / (p * delta / 2.0)).sqrt();
    Ok(1.0 + (1.0 + rad) / alpha)
}

/// `C_{δ/(d−1)} · (d − 1)`, the constant for randomized TT rounding.
pub fn rounding_constant(alpha: f64, delta: f64, p: f64, r: usize, d: usize, field: Field) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument("rounding needs d ≥ 2".into()));
    }
    let k = (d - 1) as f64;
    Ok(rsvd_constant(alpha, delta / k, p, r, d, field)? * k)
}

/// Sufficient `(R, P)` for the embedding property, raw and rounded up.
/// `L` is the constant of the product Johnson-Lindenstrauss moment bound,
/// which is not known numerically and must be supplied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OseParams {
    pub r_raw: f64,
    pub p_raw: f64,
    pub r: usize,
    pub p: usize,
}

/// `R ≥ 32(Le)² d (r log 9 + log(1/δ))` and `P ≥ 16e⁴/ε²`.
pub fn ose_sufficient_params(eps: f64, delta: f64, r: usize, d: usize, l: f64) -> Result<OseParams> {
    half_open_unit("ε", eps)?;
    open_unit("δ", delta)?;
    if r == 0 || d == 0 || !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("need r, d ≥ 1 and L > 0, got r={r}, d={d}, L={l}")));
    }
    let e = std::f64::consts::E;
    let r_raw = 32.0 * (l * e).powi(2) * d as f64 * (r as f64 * 9f64.ln() + (1.0 / delta).ln());
    let p_raw = 16.0 * e.powi(4) / (eps * eps);
    Ok(OseParams { r_raw, p_raw, r: r_raw.ceil() as usize, p: p_raw.ceil() as usize })
}
