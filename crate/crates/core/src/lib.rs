//! Tensor trains with structured random sketches.
//!
//! Trains are stored core by core in row-major `[left][mode][right]`
//! layout. Sketches are stacks of `P` low-rank blocks, contracted against
//! a train bond by bond. On top of that sit deterministic, randomized and
//! streaming rounding, Monte-Carlo checks of the embedding theory, QTT
//! builders, and a sketched Rayleigh-Ritz eigensolver.

pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod tt;
pub mod io;
pub mod sketch;
pub mod contract;
pub mod rounding;
pub mod analysis;
pub mod qtt;
pub mod eigen;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::{Field, Scalar};
pub use tt::{Core, DenseTensor, OpCore, Orthogonality, TTOperator, TensorTrain};

/// Chapters of the guide in `book/`, compiled here so their snippets run
/// as doctests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/tensor-trains.md")]
    pub mod tensor_trains {}
    #[doc = include_str!("../../../book/src/sketches.md")]
    pub mod sketches {}
    #[doc = include_str!("../../../book/src/contractions.md")]
    pub mod contractions {}
    #[doc = include_str!("../../../book/src/rounding.md")]
    pub mod rounding {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}
    #[doc = include_str!("../../../book/src/qtt.md")]
    pub mod qtt {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    pub mod eigensolver {}
}
