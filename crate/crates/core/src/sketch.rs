//! Random sketches with tensor-train structured rows.
//!
//! Every variant is a stack of `P` independent blocks. Block `j` is a chain
//! of cores `G^{(j,1)}, …, G^{(j,d)}` whose left boundary rank is the number
//! of rows it contributes, so the sketch is
//!
//! ```text
//! Ω = (1/√P) · [ (G^{(1,1)} ⋈ ⋯ ⋈ G^{(1,d)})^{≤1} ; … ; (G^{(P,1)} ⋈ ⋯ ⋈ G^{(P,d)})^{≤1} ]
//! ```
//!
//! | variant       | block ranks                     | entries                         |
//! |---------------|---------------------------------|---------------------------------|
//! | `tts`         | `R, R, …, R, 1`                 | `N_F(0, 1/R)`                   |
//! | `otts`        | `ρ₀, …, ρ_{d-1}, 1`             | scaled Haar–Stiefel unfoldings  |
//! | `gaussian_tt` | `P = 1`, per-bond list allowed  | `N_F(0, 1/r_{k-1})`             |
//! | `khatri_rao`  | `R = 1`                         | gaussian, rademacher, spherical |
//! | `f_tt_r`      | `1, R, …, R, 1`                 | see [`Variant::FTtR`]           |
//!
//! The `1/√P` factor is kept apart from the cores in [`RealizedSketch::scale`].

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{from_rows, haar_rows};
use crate::rng::{module, stream};
use crate::scalar::{Field, Scalar};
use crate::tt::{Core, TensorTrain, DENSE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Stack of `P` Gaussian TT blocks of rank `R`.
    Tts,
    /// Like `tts`, but each core unfolding is a scaled Haar–Stiefel sample.
    /// Bond ranks are `ρ_{k-1} = min(R, n_k ⋯ n_d)` and `ρ_d = 1`.
    Otts,
    /// Rank-one rows; `R` must be 1.
    KhatriRao,
    /// A single block; `P` must be 1.
    GaussianTt,
    /// `P` single-row blocks with bond rank `R`. Boundary cores have
    /// variance `1/√R` and interior cores `1/R`, which makes the map
    /// isotropic.
    FTtR,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Tts => "tts",
            Variant::Otts => "otts",
            Variant::KhatriRao => "khatri_rao",
            Variant::GaussianTt => "gaussian_tt",
            Variant::FTtR => "f_tt_r",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Distribution of the rank-one factors of a Khatri-Rao sketch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDistribution {
    #[default]
    Gaussian,
    Rademacher,
    /// Gaussian vector rescaled to norm `√n_k`.
    Spherical,
}

/// Block rank: one value, or one value per bond `ρ₀, …, ρ_{d-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rank {
    Uniform(usize),
    PerBond(Vec<usize>),
}

impl Rank {
    /// Largest bond rank.
    pub fn max(&self) -> usize {
        match self {
            Rank::Uniform(r) => *r,
            Rank::PerBond(v) => v.iter().copied().max().unwrap_or(1),
        }
    }
}

impl From<usize> for Rank {
    fn from(r: usize) -> Self {
        Rank::Uniform(r)
    }
}

/// Which end of the chain carries the row index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows on the left boundary (`r₀`); contracted right to left.
    #[default]
    Right,
    /// Rows on the right boundary (`r_d`); contracted left to right.
    Left,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub variant: Variant,
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "R")]
    pub r: Rank,
    pub dims: Vec<usize>,
    pub field: Field,
    pub seed: u64,
    #[serde(default)]
    pub base: BaseDistribution,
    #[serde(default)]
    pub orientation: Orientation,
}

impl SketchSpec {
    pub fn new(variant: Variant, p: usize, r: usize, dims: &[usize], field: Field, seed: u64) -> Self {
        SketchSpec {
            variant,
            p,
            r: Rank::Uniform(r),
            dims: dims.to_vec(),
            field,
            seed,
            base: BaseDistribution::Gaussian,
            orientation: Orientation::Right,
        }
    }

    pub fn tts(p: usize, r: usize, dims: &[usize], field: Field, seed: u64) -> Self {
        Self::new(Variant::Tts, p, r, dims, field, seed)
    }

    pub fn otts(p: usize, r: usize, dims: &[usize], field: Field, seed: u64) -> Self {
        Self::new(Variant::Otts, p, r, dims, field, seed)
    }

    pub fn khatri_rao(p: usize, dims: &[usize], field: Field, seed: u64, base: BaseDistribution) -> Self {
        SketchSpec { base, ..Self::new(Variant::KhatriRao, p, 1, dims, field, seed) }
    }

    pub fn gaussian_tt(ranks: Vec<usize>, dims: &[usize], field: Field, seed: u64) -> Self {
        SketchSpec { r: Rank::PerBond(ranks), ..Self::new(Variant::GaussianTt, 1, 1, dims, field, seed) }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Bond ranks `ρ₀, …, ρ_d` of one block, in right orientation.
    pub fn block_ranks(&self) -> Result<Vec<usize>> {
        let d = self.dims.len();
        if d == 0 {
            return Err(Error::InvalidArgument("sketch needs at least one mode".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidArgument("P must be at least 1".into()));
        }
        let uniform = |what: &str| -> Result<usize> {
            match &self.r {
                Rank::Uniform(r) if *r >= 1 => Ok(*r),
                Rank::Uniform(_) => Err(Error::InvalidArgument("R must be at least 1".into())),
                Rank::PerBond(_) => Err(Error::InvalidArgument(format!("{what} takes a single rank R"))),
            }
        };
        let mut ranks = match self.variant {
            Variant::Tts => vec![uniform("tts")?; d + 1],
            Variant::FTtR => {
                let mut v = vec![uniform("f_tt_r")?; d + 1];
                v[0] = 1;
                v
            }
            Variant::KhatriRao => {
                if uniform("khatri_rao")? != 1 {
                    return Err(Error::InvalidArgument("khatri_rao requires R = 1".into()));
                }
                vec![1; d + 1]
            }
            Variant::GaussianTt => {
                if self.p != 1 {
                    return Err(Error::InvalidArgument("gaussian_tt requires P = 1".into()));
                }
                match &self.r {
                    Rank::Uniform(r) => vec![*r; d + 1],
                    Rank::PerBond(v) => {
                        if v.len() != d || v.contains(&0) {
                            return Err(Error::InvalidArgument(format!(
                                "gaussian_tt rank list needs {d} positive entries, got {v:?}"
                            )));
                        }
                        let mut v = v.clone();
                        v.push(1);
                        v
                    }
                }
            }
            Variant::Otts => {
                let r = uniform("otts")?;
                // ρ_{k-1} = min(R, n_k ⋯ n_d), saturating to avoid overflow
                let mut v = vec![1; d + 1];
                let mut tail: usize = 1;
                for k in (0..d).rev() {
                    tail = tail.saturating_mul(self.dims[k]);
                    v[k] = r.min(tail);
                }
                v
            }
        };
        ranks[d] = 1;
        Ok(ranks)
    }

    /// Number of rows `m` of the sketch matrix.
    pub fn embedding_dim(&self) -> Result<usize> {
        Ok(self.p * self.block_ranks()?[0])
    }
}

/// A drawn sketch: `P` blocks of `d` cores and the global scale `1/√P`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedSketch<T> {
    spec: SketchSpec,
    blocks: Vec<Vec<Core<T>>>,
    scale: f64,
}

/// Draws the sketch described by `spec`. The same spec always yields the
/// same cores, bit for bit.
pub fn make_sketch<T: Scalar>(spec: &SketchSpec) -> Result<RealizedSketch<T>> {
    if spec.field != T::FIELD {
        return Err(Error::FieldMismatch { expected: T::FIELD, found: spec.field });
    }
    match spec.orientation {
        Orientation::Right => {
            let blocks = (0..spec.p).map(|j| draw_block(spec, j, module::SKETCH)).collect::<Result<Vec<_>>>()?;
            Ok(RealizedSketch { spec: spec.clone(), blocks, scale: 1.0 / (spec.p as f64).sqrt() })
        }
        Orientation::Left => {
            // mirror image of a right-oriented sketch on the reversed modes
            let mut mirrored = spec.clone();
            mirrored.dims.reverse();
            let blocks = (0..spec.p)
                .map(|j| {
                    let cores = draw_block(&mirrored, j, module::LEFT_SKETCH)?;
                    Ok(cores.iter().rev().map(flip_core).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RealizedSketch { spec: spec.clone(), blocks, scale: 1.0 / (spec.p as f64).sqrt() })
        }
    }
}

fn flip_core<T: Scalar>(c: &Core<T>) -> Core<T> {
    Core::from_fn(c.right(), c.n(), c.left(), |a, i, b| c.get(b, i, a))
}

fn draw_block<T: Scalar>(spec: &SketchSpec, j: usize, module: u64) -> Result<Vec<Core<T>>> {
    let ranks = spec.block_ranks()?;
    let d = spec.dims.len();
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let (left, n, right) = (ranks[k], spec.dims[k], ranks[k + 1]);
        let mut rng = stream(spec.seed, module, j as u64, k as u64);
        let core = match spec.variant {
            Variant::Tts | Variant::GaussianTt => {
                let std = (1.0 / left as f64).sqrt();
                Core::from_fn(left, n, right, |_, _, _| T::sample_normal(&mut rng) * T::from_re(std))
            }
            Variant::FTtR => {
                let var = if d == 1 {
                    1.0
                } else if k == 0 || k == d - 1 {
                    1.0 / (spec.r.max() as f64).sqrt()
                } else {
                    1.0 / spec.r.max() as f64
                };
                let std = var.sqrt();
                Core::from_fn(left, n, right, |_, _, _| T::sample_normal(&mut rng) * T::from_re(std))
            }
            Variant::KhatriRao => {
                let mut v: Vec<T> = match spec.base {
                    BaseDistribution::Gaussian | BaseDistribution::Spherical => {
                        (0..n).map(|_| T::sample_normal(&mut rng)).collect()
                    }
                    BaseDistribution::Rademacher => (0..n).map(|_| T::sample_sign(&mut rng)).collect(),
                };
                if spec.base == BaseDistribution::Spherical {
                    let norm = v.iter().map(|z| z.abs2()).sum::<f64>().sqrt();
                    let s = T::from_re((n as f64).sqrt() / norm);
                    v.iter_mut().for_each(|z| *z *= s);
                }
                Core::new(1, n, 1, v)?
            }
            Variant::Otts => {
                let u: DMatrix<T> = haar_rows(left, n * right, &mut rng);
                let s = ((right * n) as f64 / left as f64).sqrt();
                Core::from_right_unfolding(n, &(u * T::from_re(s)))
            }
        };
        cores.push(core);
    }
    Ok(cores)
}

impl<T: Scalar> RealizedSketch<T> {
    /// Reassembles a sketch from stored parts; each block must match the
    /// ranks the spec prescribes.
    pub fn from_parts(spec: SketchSpec, blocks: Vec<Vec<Core<T>>>, scale: f64) -> Result<Self> {
        if blocks.len() != spec.p {
            return Err(Error::DimMismatch(format!("spec has P = {}, got {} blocks", spec.p, blocks.len())));
        }
        for b in &blocks {
            let shapes: Vec<usize> = b.iter().map(|c| c.n()).collect();
            if shapes != spec.dims {
                return Err(Error::DimMismatch(format!("block modes {shapes:?} vs spec {:?}", spec.dims)));
            }
            TensorTrain::new(b.clone())?;
        }
        Ok(RealizedSketch { spec, blocks, scale })
    }

    pub fn spec(&self) -> &SketchSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[Vec<Core<T>>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[Core<T>] {
        &self.blocks[j]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Global factor applied to every row (`1/√P`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn orientation(&self) -> Orientation {
        self.spec.orientation
    }

    pub fn dims(&self) -> &[usize] {
        &self.spec.dims
    }

    pub fn order(&self) -> usize {
        self.spec.dims.len()
    }

    /// Bond ranks `ρ₀, …, ρ_d` of block `j` in storage order.
    pub fn block_ranks(&self, j: usize) -> Vec<usize> {
        let b = &self.blocks[j];
        let mut r = vec![b[0].left()];
        r.extend(b.iter().map(|c| c.right()));
        r
    }

    /// Rows contributed by one block.
    pub fn block_rows(&self) -> usize {
        let r = self.block_ranks(0);
        match self.orientation() {
            Orientation::Right => r[0],
            Orientation::Left => r[self.order()],
        }
    }

    /// Number of rows `m`.
    pub fn rows(&self) -> usize {
        self.blocks.len() * self.block_rows()
    }

    /// Rows at bond `k` of the stacked sketch, for partial contractions:
    /// `P · ρ_k`.
    pub fn stacked_rank(&self, k: usize) -> usize {
        self.blocks.len() * self.block_ranks(0)[k]
    }

    /// Dense `m × N` matrix with block-major rows and the scale applied.
    pub fn dense(&self) -> Result<DMatrix<T>> {
        let n: usize = self.dims().iter().product();
        let m = self.rows();
        if m.saturating_mul(n) > DENSE_CAP {
            return Err(Error::DenseCap { requested: m.saturating_mul(n), cap: DENSE_CAP });
        }
        let rb = self.block_rows();
        let mut out = DMatrix::<T>::zeros(m, n);
        for j in 0..self.blocks.len() {
            out.view_mut((j * rb, 0), (rb, n)).copy_from(&self.block_dense(j)?);
        }
        Ok(out)
    }

    /// Rows of block `j` as a dense matrix, including the global scale.
    pub fn block_dense(&self, j: usize) -> Result<DMatrix<T>> {
        let n: usize = self.dims().iter().product();
        let rb = self.block_rows();
        let block = TensorTrain::new(self.blocks[j].clone())?.dense_chain(DENSE_CAP)?;
        let mat = match self.orientation() {
            // [ρ₀, n…, 1] is already ρ₀ × N
            Orientation::Right => from_rows(rb, n, &block.data),
            // [1, n…, ρ_d] is N × ρ_d
            Orientation::Left => from_rows(n, rb, &block.data).transpose(),
        };
        Ok(mat * T::from_re(self.scale))
    }

    /// The stacked sketch as a single block train with left boundary `m`.
    ///
    /// Interior slices are block diagonal over the `P` blocks and the last
    /// core stacks the block cores vertically. The global scale is folded
    /// into the first core.
    pub fn block_tt_view(&self) -> Result<TensorTrain<T>> {
        if self.orientation() != Orientation::Right {
            return Err(Error::InvalidArgument("block view is defined for right-oriented sketches".into()));
        }
        let p = self.blocks.len();
        let d = self.order();
        let r = self.block_ranks(0);
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let n = self.dims()[k];
            let stacked_right = k == d - 1;
            let (left, right) = (p * r[k], if stacked_right { r[k + 1] } else { p * r[k + 1] });
            let mut core = Core::zeros(left, n, right);
            for (j, b) in self.blocks.iter().enumerate() {
                let c = &b[k];
                let w = if k == 0 { T::from_re(self.scale) } else { T::one() };
                for a in 0..c.left() {
                    for i in 0..n {
                        for bb in 0..c.right() {
                            let col = if stacked_right { bb } else { j * r[k + 1] + bb };
                            core.set(j * r[k] + a, i, col, w * c.get(a, i, bb));
                        }
                    }
                }
            }
            cores.push(core);
        }
        TensorTrain::new(cores)
    }

    /// Writes one `TTF1` file per block plus `manifest.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.blocks.len());
        for (j, b) in self.blocks.iter().enumerate() {
            let name = format!("block_{j:04}.ttf");
            io::save(&TensorTrain::new(b.clone())?, dir.join(&name))?;
            files.push(name);
        }
        let manifest = Manifest { spec: self.spec.clone(), scale: self.scale, blocks: files };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
        if manifest.spec.field != T::FIELD {
            return Err(Error::FieldMismatch { expected: T::FIELD, found: manifest.spec.field });
        }
        let blocks = manifest
            .blocks
            .iter()
            .map(|f| Ok(io::load::<T>(dir.join(f))?.into_cores()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(manifest.spec, blocks, manifest.scale)
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    spec: SketchSpec,
    scale: f64,
    blocks: Vec<String>,
}
