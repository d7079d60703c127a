use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

pub const MAX_GAMMA_ORDER: usize = 16;

/// Coefficients `γ_I` of the fourth-moment expansion of a single Gaussian TT
/// block of rank `R`:
///
/// `E[Tr(Ω S Ω*)²] ≤ Σ_I γ_I ‖Tr_I S‖²_F`, with equality over ℂ.
///
/// Built by conditioning on one core at a time, left to right. Stage `k`
/// holds coefficients over subsets of `{0, …, k}` where the last slot is the
/// open bond; absorbing core `k` maps `(γ_I, γ_{I∪k})` to
///
/// * `γ'_I = (1 + (p-1)/R) γ_I + (p/R) γ_{I∪k}`
/// * `γ'_{I∪{k,k+1}} = γ_I / R + γ_{I∪k}`
///
/// and the last core closes the bond, so `k+1` is dropped from the second
/// update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub d: usize,
    pub r: usize,
    pub field: Field,
    /// Indexed by subset bitmask.
    pub coeffs: Vec<f64>,
}

impl GammaTable {
    pub fn new(d: usize, r: usize, field: Field) -> Result<Self> {
        if d == 0 || d > MAX_GAMMA_ORDER {
            return Err(Error::InvalidArgument(format!("γ table needs 1 ≤ d ≤ {MAX_GAMMA_ORDER}, got {d}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("γ table needs R ≥ 1".into()));
        }
        let (p, rf) = (field.p(), r as f64);
        let stay = 1.0 + (p - 1.0) / rf;
        let mix = p / rf;
        let inv = 1.0 / rf;
        // first core: m = Tr(S₁)², all weight on the bond slot
        let mut g = vec![0.0; 1 << d];
        g[1] = 1.0;
        for k in 1..d {
            // bond slot of stage k is bit k-1; the new bond is bit k
            let mut next = vec![0.0; 1 << d];
            let bond = 1 << (k - 1);
            for i in 0..bond {
                let (a, b) = (g[i], g[i | bond]);
                next[i] += stay * a + mix * b;
                next[i | bond | (bond << 1)] += inv * a + b;
            }
            g = next;
        }
        let bond = 1 << (d - 1);
        let mut out = vec![0.0; 1 << d];
        for i in 0..bond {
            let (a, b) = (g[i], g[i | bond]);
            out[i] = stay * a + mix * b;
            out[i | bond] = inv * a + b;
        }
        Ok(GammaTable { d, r, field, coeffs: out })
    }

    pub fn get(&self, mask: u32) -> f64 {
        self.coeffs[mask as usize]
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// `(1 + p/R)^d`.
    pub fn expected_sum(&self) -> f64 {
        (1.0 + self.field.p() / self.r as f64).powi(self.d as i32)
    }

    /// `γ_{[d]}`.
    pub fn full(&self) -> f64 {
        self.coeffs[(1usize << self.d) - 1]
    }

    /// `γ_∅` as produced by the recursion.
    pub fn empty(&self) -> f64 {
        self.coeffs[0]
    }

    /// Closed form `(p/R)(1 + (p-1)/R)^{d-1}` for `γ_∅`.
    pub fn empty_closed_form(&self) -> f64 {
        let (p, r) = (self.field.p(), self.r as f64);
        p / r * (1.0 + (p - 1.0) / r).powi(self.d as i32 - 1)
    }

    /// `γ_∅` three ways: from the recursion, from the closed form, and the
    /// value 0 that a shortcut argument would suggest. The first two agree.
    pub fn empty_values(&self) -> [f64; 3] {
        [self.empty(), self.empty_closed_form(), 0.0]
    }

    /// Number of non-zero coefficients.
    pub fn support(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }

    /// `Σ_I γ_I w(I)`.
    pub fn weighted_sum(&self, mut w: impl FnMut(u32) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| c * w(m as u32))
            .sum()
    }
}
