//! Diagnostics for sketches: partial traces, moment coefficients,
//! Monte-Carlo checks, empirical embedding spectra, entanglement constants
//! and the parameter calculators of the embedding guarantees.
//!
//! Subsets `I ⊆ [d]` are `u32` bitmasks with bit `k` standing for mode `k`
//! (0-based).

mod bounds;
mod entanglement;
mod gamma;
mod moments;
mod partial_trace;
mod qb;
mod spectrum;
pub mod stats;

pub use bounds::{
    cq_upper_bound, ose_sufficient_params, osi_bound, osi_sufficient_p, rounding_constant, rsvd_constant, OseParams,
};
pub use entanglement::{entanglement_constant, entanglement_constant_tt, entanglement_measure, Entanglement};
pub use gamma::{GammaTable, MAX_GAMMA_ORDER};
pub use moments::{
    gamma_weighted_traces, isotropy_mc, mc_moment_matrix, mc_moment_tensor, predicted_matrix_moments, random_gaussian_matrix, random_psd, MatrixMoments,
    MeanEstimate, MomentEstimate, TensorMoment,
};
pub use partial_trace::{cs_check, mask_of, partial_trace, CsCheck};
pub use qb::{qb_sketch, QbResult, QbSummary};
pub use spectrum::{empirical_spectrum, BasisInfo, SpectrumReport, SpectrumRow, CSV_HEADER, MAX_GRAM_CONDITION};
