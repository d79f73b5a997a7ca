//! The patch-based low-rank denoising pipeline.
//!
//! For every position of a reference grid over the (symmetrically padded)
//! noisy image:
//!
//! 1. [`block_match`] picks the `m` patches of the `n × n` search window
//!    closest to the reference patch in squared ℓ² distance;
//! 2. [`build_group`] stacks them as columns of a `d² × m` similarity matrix
//!    and subtracts their mean;
//! 3. the group is denoised by hard thresholding, either in the PCA basis
//!    ([`denoise_group_pca`], keep component `k` iff `λ_k² > t²`) or on the
//!    singular values ([`denoise_group_svd`], keep `Σ_kk > t·√m`). Both give
//!    the same matrix;
//! 4. every estimated patch is accumulated at its position and the image is
//!    the per-pixel mean of all estimates.
//!
//! Groups are independent, so grid rows run in parallel. Each grid row
//! aggregates into its own band buffer and the bands are merged in row order,
//! which makes the output bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::image::{extract_into, pad_symmetric, Accumulator, Patch};
use crate::linalg::{dot, eig_sym, hard_threshold, svd, EigenSystem, Matrix};
use crate::{Error, GrayImage, Result};

/// Which of the two equivalent shrinkage routes to run on each group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupPath {
    /// Eigendecomposition of `S·Sᵀ`, threshold on coefficient variance.
    #[default]
    Pca,
    /// Singular values of `S`, threshold at `t·√m`.
    Svd,
}

impl fmt::Display for GroupPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupPath::Pca => "pca",
            GroupPath::Svd => "svd",
        })
    }
}

impl FromStr for GroupPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(GroupPath::Pca),
            "svd" => Ok(GroupPath::Svd),
            other => Err(Error::InvalidParams(format!(
                "unknown path {other:?} (pca|svd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseParams {
    /// Patch side `d`.
    pub patch_size: usize,
    /// Search window side `n`.
    pub window: usize,
    /// Patches per group `m`.
    pub group_size: usize,
    /// Noise standard deviation in intensity units.
    pub sigma: f64,
    /// Threshold `t = t_factor · sigma`.
    pub t_factor: f64,
    /// Step between reference patches.
    pub stride: usize,
    pub path: GroupPath,
    /// Worker threads; 0 means available parallelism.
    pub threads: usize,
}

impl DenoiseParams {
    pub const DEFAULT_PATCH_SIZE: usize = 7;
    pub const DEFAULT_WINDOW: usize = 35;
    pub const DEFAULT_T_FACTOR: f64 = 1.5;

    /// Defaults: `d = 7`, `n = 35`, `m = 5·d²`, `t = 1.5σ`, stride `d`, PCA path.
    pub fn new(sigma: f64) -> Self {
        Self::with_patch_size(sigma, Self::DEFAULT_PATCH_SIZE)
    }

    /// Defaults scaled to patch side `d` (`m = 5·d²`, stride `d`).
    pub fn with_patch_size(sigma: f64, d: usize) -> Self {
        Self {
            patch_size: d,
            window: Self::DEFAULT_WINDOW,
            group_size: 5 * d * d,
            sigma,
            t_factor: Self::DEFAULT_T_FACTOR,
            stride: d,
            path: GroupPath::Pca,
            threads: 0,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.t_factor * self.sigma
    }

    /// Candidate patches per search window, `(n − d + 1)²`.
    pub fn candidates(&self) -> usize {
        let side = self.window + 1 - self.patch_size.min(self.window + 1);
        side * side
    }

    /// Padding applied before block matching: `⌈(n − d)/2⌉ + d`.
    pub fn margin(&self) -> usize {
        (self.window - self.patch_size).div_ceil(2) + self.patch_size
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.patch_size;
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if d == 0 {
            return fail("patch size must be >= 1".into());
        }
        if self.window < d {
            return fail(format!(
                "window {} smaller than patch size {d}",
                self.window
            ));
        }
        if self.group_size < d * d {
            return fail(format!(
                "group size {} below d² = {}",
                self.group_size,
                d * d
            ));
        }
        if self.group_size > self.candidates() {
            return fail(format!(
                "group size {} exceeds the {} candidates of a {} window",
                self.group_size,
                self.candidates(),
                self.window
            ));
        }
        if self.stride == 0 || self.stride > d {
            return fail(format!("stride {} must lie in 1..={d}", self.stride));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return fail(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if !self.t_factor.is_finite() || self.t_factor < 0.0 {
            return fail(format!("t_factor must be >= 0, got {}", self.t_factor));
        }
        Ok(())
    }

    fn thread_count(&self) -> usize {
        if self.threads > 0 {
            self.threads
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}

/// Reference-patch offsets along one axis: multiples of `stride` up to
/// `len − d`, with `len − d` appended when missing.
fn grid_offsets(len: usize, d: usize, stride: usize) -> Vec<usize> {
    let last = len - d;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

/// Top-left corners (row, col) of reference patches in image coordinates.
pub fn reference_grid(
    width: usize,
    height: usize,
    d: usize,
    stride: usize,
) -> Result<Vec<(usize, usize)>> {
    if d == 0 || width < d || height < d {
        return Err(Error::ImageTooSmall {
            width,
            height,
            patch: d,
        });
    }
    if stride == 0 {
        return Err(Error::InvalidParams("stride must be >= 1".into()));
    }
    let cols = grid_offsets(width, d, stride);
    Ok(grid_offsets(height, d, stride)
        .into_iter()
        .flat_map(|r| cols.iter().map(move |&c| (r, c)))
        .collect())
}

/// Top-left corner of the search window around a reference patch.
fn window_origin(reference: (usize, usize), params: &DenoiseParams) -> (isize, isize) {
    let half = ((params.window - params.patch_size) / 2) as isize;
    (reference.0 as isize - half, reference.1 as isize - half)
}

/// The `m` patches of the search window closest to the reference patch.
///
/// The reference comes first; the remaining `m − 1` are the other candidates
/// ordered by (squared distance, row-major position in the window).
pub fn block_match(
    padded: &GrayImage,
    reference: (usize, usize),
    params: &DenoiseParams,
) -> Result<Vec<(usize, usize)>> {
    let (d, n, m) = (params.patch_size, params.window, params.group_size);
    let (wr, wc) = window_origin(reference, params);
    if wr < 0
        || wc < 0
        || wr as usize + n > padded.height()
        || wc as usize + n > padded.width()
        || reference.0 + d > padded.height()
        || reference.1 + d > padded.width()
    {
        return Err(Error::WindowOutOfBounds {
            row: wr,
            col: wc,
            side: n,
        });
    }
    let (wr, wc) = (wr as usize, wc as usize);
    let side = n - d + 1;
    if m == 0 || m > side * side {
        return Err(Error::InvalidParams(format!(
            "group size {m} outside 1..={}",
            side * side
        )));
    }

    let reference_rows: Vec<&[f64]> = (0..d)
        .map(|i| &padded.row(reference.0 + i)[reference.1..reference.1 + d])
        .collect();
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(side * side);
    for dr in 0..side {
        for dc in 0..side {
            let (r, c) = (wr + dr, wc + dc);
            if (r, c) == reference {
                continue;
            }
            let mut dist = 0.0;
            for (i, ref_row) in reference_rows.iter().enumerate() {
                let cand = &padded.row(r + i)[c..c + d];
                dist += cand
                    .iter()
                    .zip(*ref_row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            scored.push((dist, dr * side + dc));
        }
    }

    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let others = m - 1;
    if others > 0 && others < scored.len() {
        scored.select_nth_unstable_by(others - 1, by_key);
    }
    scored.truncate(others);
    scored.sort_unstable_by(by_key);

    let mut coords = Vec::with_capacity(m);
    coords.push(reference);
    coords.extend(
        scored
            .iter()
            .map(|&(_, idx)| (wr + idx / side, wc + idx % side)),
    );
    Ok(coords)
}

/// Centered similarity matrix of a patch group.
#[derive(Debug, Clone)]
pub struct SimilarityGroup {
    /// `d² × m`; column `l` is patch `l` minus the centroid.
    pub matrix: Matrix,
    /// Mean of the `m` patch vectors.
    pub centroid: Vec<f64>,
    /// Top-left corners in padded coordinates; `coords[0]` is the reference.
    pub coords: Vec<(usize, usize)>,
    pub patch_size: usize,
}

impl SimilarityGroup {
    /// Centers the columns of `raw` (one vectorized patch per column).
    pub fn from_columns(
        mut raw: Matrix,
        coords: Vec<(usize, usize)>,
        patch_size: usize,
    ) -> Result<Self> {
        if raw.rows() != patch_size * patch_size || raw.cols() != coords.len() || coords.is_empty()
        {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", patch_size * patch_size, coords.len()),
                actual: format!("{}x{}", raw.rows(), raw.cols()),
            });
        }
        let m = raw.cols() as f64;
        let mut centroid = Vec::with_capacity(raw.rows());
        for i in 0..raw.rows() {
            let row = raw.row_mut(i);
            let mean = row.iter().sum::<f64>() / m;
            row.iter_mut().for_each(|v| *v -= mean);
            centroid.push(mean);
        }
        Ok(Self {
            matrix: raw,
            centroid,
            coords,
            patch_size,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Stacks the patches at `coords` and subtracts their centroid.
pub fn build_group(
    padded: &GrayImage,
    coords: &[(usize, usize)],
    patch_size: usize,
) -> Result<SimilarityGroup> {
    let dim = patch_size * patch_size;
    let m = coords.len();
    let mut raw = Matrix::zeros(dim, m);
    let mut buf = vec![0.0; dim];
    for (l, &(r, c)) in coords.iter().enumerate() {
        extract_into(padded, r, c, patch_size, &mut buf)?;
        for (k, &v) in buf.iter().enumerate() {
            raw[(k, l)] = v;
        }
    }
    SimilarityGroup::from_columns(raw, coords.to_vec(), patch_size)
}

/// Denoised patches of one group, centroid restored.
#[derive(Debug, Clone)]
pub struct GroupEstimate {
    /// `d² × m`; column `l` is the estimate of patch `coords[l]`.
    pub matrix: Matrix,
    pub coords: Vec<(usize, usize)>,
    pub patch_size: usize,
    /// Number of components kept.
    pub rank: usize,
}

impl GroupEstimate {
    pub fn patch(&self, l: usize) -> Patch {
        let (row, col) = self.coords[l];
        Patch {
            row,
            col,
            size: self.patch_size,
            values: self.matrix.column(l),
        }
    }

    fn accumulate_into(&self, acc: &mut Accumulator) -> Result<()> {
        let d = self.patch_size;
        for (l, &(r, c)) in self.coords.iter().enumerate() {
            acc.accumulate_values(r, c, d, |k| self.matrix[(k, l)])?;
        }
        Ok(())
    }
}

fn with_centroid(mut matrix: Matrix, group: &SimilarityGroup, rank: usize) -> GroupEstimate {
    for (i, &c) in group.centroid.iter().enumerate() {
        matrix.row_mut(i).iter_mut().for_each(|v| *v += c);
    }
    GroupEstimate {
        matrix,
        coords: group.coords.clone(),
        patch_size: group.patch_size,
        rank,
    }
}

fn check_basis(group: &SimilarityGroup, basis: &EigenSystem) -> Result<()> {
    if basis.dim() != group.matrix.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("basis of dimension {}", group.matrix.rows()),
            actual: format!("dimension {}", basis.dim()),
        });
    }
    Ok(())
}

/// Principal component basis of the group: eigensystem of `S·Sᵀ`.
pub fn group_basis(group: &SimilarityGroup) -> Result<EigenSystem> {
    eig_sym(&group.matrix.gram())
}

/// Basis coefficients `⟨s_l, g_k⟩` as a `d² × m` matrix (row `k` = component `k`).
pub fn coefficients(group: &SimilarityGroup, basis: &EigenSystem) -> Result<Matrix> {
    check_basis(group, basis)?;
    Ok(basis.basis.transpose().matmul(&group.matrix))
}

/// `(1/m)·Σ_l ⟨s_l, g_k⟩²` for every component `k`.
pub fn coefficient_variances(group: &SimilarityGroup, basis: &EigenSystem) -> Result<Vec<f64>> {
    let coef = coefficients(group, basis)?;
    let m = group.len() as f64;
    Ok((0..coef.rows())
        .map(|k| dot(coef.row(k), coef.row(k)) / m)
        .collect())
}

/// Projects the group onto the components selected by `mask` and restores
/// the centroid: `s̄_l = Σ_k a_k ⟨s_l, g_k⟩ g_k + s_c`.
pub fn project(
    group: &SimilarityGroup,
    basis: &EigenSystem,
    mask: &[bool],
) -> Result<GroupEstimate> {
    check_basis(group, basis)?;
    if mask.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("mask of length {}", basis.dim()),
            actual: format!("length {}", mask.len()),
        });
    }
    let (dim, m) = group.matrix.shape();
    let mut out = Matrix::zeros(dim, m);
    let mut weights = vec![0.0; m];
    let mut rank = 0;
    for k in (0..dim).filter(|&k| mask[k]) {
        rank += 1;
        let g = basis.vector(k);
        weights.iter_mut().for_each(|w| *w = 0.0);
        for (i, &gi) in g.iter().enumerate() {
            for (w, &s) in weights.iter_mut().zip(group.matrix.row(i)) {
                *w += gi * s;
            }
        }
        for (i, &gi) in g.iter().enumerate() {
            for (o, &w) in out.row_mut(i).iter_mut().zip(&weights) {
                *o += gi * w;
            }
        }
    }
    Ok(with_centroid(out, group, rank))
}

/// Components kept by threshold `t`: `eigenvalue_k / m > t²`.
pub fn pca_mask(basis: &EigenSystem, group_size: usize, t: f64) -> Vec<bool> {
    let m = group_size as f64;
    basis.eigenvalues.iter().map(|&l| l / m > t * t).collect()
}

/// Hard thresholding in the PCA basis of `S·Sᵀ`.
pub fn denoise_group_pca(group: &SimilarityGroup, t: f64) -> Result<GroupEstimate> {
    check_threshold(t)?;
    let basis = group_basis(group)?;
    project(group, &basis, &pca_mask(&basis, group.len(), t))
}

/// Hard thresholding of the singular values of `S` at `t·√m`.
pub fn denoise_group_svd(group: &SimilarityGroup, t: f64) -> Result<GroupEstimate> {
    check_threshold(t)?;
    let decomposition = svd(&group.matrix)?;
    let kept = hard_threshold(&decomposition.singular, t * (group.len() as f64).sqrt());
    let rank = kept.iter().filter(|&&s| s != 0.0).count();
    Ok(with_centroid(decomposition.compose(&kept), group, rank))
}

pub fn denoise_group(group: &SimilarityGroup, t: f64, path: GroupPath) -> Result<GroupEstimate> {
    match path {
        GroupPath::Pca => denoise_group_pca(group, t),
        GroupPath::Svd => denoise_group_svd(group, t),
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParams(format!(
            "threshold must be >= 0, got {t}"
        )));
    }
    Ok(())
}

/// `θ_k² = (1/m)·Σ_l ⟨g_k, u_l⟩²` of clean centered patches in a (noisy) basis.
pub fn theta_squared(clean_group: &SimilarityGroup, basis: &EigenSystem) -> Result<Vec<f64>> {
    coefficient_variances(clean_group, basis)
}

/// Oracle coefficient mask `â_k = [θ_k² > σ²]`, from the clean group.
pub fn ideal_coefficients(
    clean_group: &SimilarityGroup,
    basis: &EigenSystem,
    sigma: f64,
) -> Result<Vec<bool>> {
    Ok(theta_squared(clean_group, basis)?
        .into_iter()
        .map(|t2| t2 > sigma * sigma)
        .collect())
}

/// A padded noisy image with its reference grid, ready to be denoised.
#[derive(Debug, Clone)]
pub struct Pipeline {
    padded: GrayImage,
    params: DenoiseParams,
    margin: usize,
    width: usize,
    height: usize,
    grid_rows: Vec<usize>,
    grid_cols: Vec<usize>,
}

impl Pipeline {
    pub fn new(noisy: &GrayImage, params: &DenoiseParams) -> Result<Self> {
        params.validate()?;
        let d = params.patch_size;
        let (width, height) = (noisy.width(), noisy.height());
        if width < d || height < d {
            return Err(Error::ImageTooSmall {
                width,
                height,
                patch: d,
            });
        }
        let margin = params.margin();
        Ok(Self {
            padded: pad_symmetric(noisy, margin)?,
            params: params.clone(),
            margin,
            width,
            height,
            grid_rows: grid_offsets(height, d, params.stride),
            grid_cols: grid_offsets(width, d, params.stride),
        })
    }

    pub fn padded(&self) -> &GrayImage {
        &self.padded
    }

    pub fn params(&self) -> &DenoiseParams {
        &self.params
    }

    /// Reference positions in padded coordinates, row-major.
    pub fn references(&self) -> Vec<(usize, usize)> {
        self.grid_rows
            .iter()
            .flat_map(|&r| {
                self.grid_cols
                    .iter()
                    .map(move |&c| (r + self.margin, c + self.margin))
            })
            .collect()
    }

    /// Block-matched, centered group around a reference (padded coordinates).
    pub fn group(&self, reference: (usize, usize)) -> Result<SimilarityGroup> {
        let coords = block_match(&self.padded, reference, &self.params)?;
        build_group(&self.padded, &coords, self.params.patch_size)
    }

    /// Aggregates every group of one grid row into a band buffer.
    fn process_row(&self, grid_row: usize) -> Result<Accumulator> {
        let reference_row = grid_row + self.margin;
        let (band_top, _) = window_origin((reference_row, 0), &self.params);
        let mut band = Accumulator::with_origin(
            band_top as usize,
            0,
            self.padded.width(),
            self.params.window,
        );
        let t = self.params.threshold();
        for &c in &self.grid_cols {
            let group = self.group((reference_row, c + self.margin))?;
            denoise_group(&group, t, self.params.path)?.accumulate_into(&mut band)?;
        }
        Ok(band)
    }

    pub fn run(&self) -> Result<GrayImage> {
        let threads = self.params.thread_count();
        let bands: Vec<Result<Accumulator>> = if threads <= 1 {
            self.grid_rows
                .iter()
                .map(|&r| self.process_row(r))
                .collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            pool.install(|| {
                self.grid_rows
                    .par_iter()
                    .map(|&r| self.process_row(r))
                    .collect()
            })
        };
        let mut total = Accumulator::new(self.padded.width(), self.padded.height());
        for band in bands {
            total.merge(&band?)?;
        }
        let interior = total.cropped(self.margin, self.margin, self.width, self.height)?;
        let out = interior.finalize();
        debug_assert!(out.is_ok(), "reference grid must cover every pixel");
        out
    }
}

/// Denoises `noisy` with known noise level `params.sigma`.
pub fn denoise_image(noisy: &GrayImage, params: &DenoiseParams) -> Result<GrayImage> {
    Pipeline::new(noisy, params)?.run()
}
