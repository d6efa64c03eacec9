//! Multi-level filter bank built by squaring weights, and the layer
//! decomposition `{W₁y, (W₂−W₁)y, …, (I−W_k)y}`.
//!
//! `W₁` is the smoothest filter (largest `h`). Squaring every weight of
//! level `l` yields level `l+1` with `h` halved, so only level 1 ever calls
//! `exp`.
//!
//! Two routes produce identical layers:
//! - [`build_cascade`] + [`decompose`] materialize every level's weights.
//! - [`level_responses`] streams one row at a time and keeps only the
//!   per-level weighted sums and degrees, which is what the pipeline uses on
//!   large images.
//!
//! Both accumulate in the same slot order, so their outputs are bit-identical.

use rayon::prelude::*;

use crate::affinity::{
    build_weight_field, compute_degrees, compute_valid_counts, fill_row, window_degree,
    KernelParams, WeightField,
};
use crate::error::{invalid, Result};
use crate::normfilter::{
    alpha_from_degrees, estimate_alpha, exact_from_sums, norm_free_from_sums, weighted_sums,
    AlphaEstimate, AlphaStrategy, FilterMode, NormMode,
};
use crate::plane::ImagePlane;

/// Squares every weight; equivalent to rebuilding with `h/2`.
pub fn hadamard_square(w: &WeightField) -> WeightField {
    let weights: Vec<f64> = w.weights.par_iter().map(|&k| k * k).collect();
    let degree = compute_degrees(&weights, w.window_size());
    WeightField {
        weights,
        degree,
        valid_count: w.valid_count.clone(),
        exp_evaluations: 0,
        ..*w
    }
}

/// Materialized filter bank `[W₁ … W_k]`.
#[derive(Debug, Clone)]
pub struct FilterCascade {
    levels: Vec<WeightField>,
    alphas: Vec<AlphaEstimate>,
    norm: NormMode,
    h1: f64,
}

impl FilterCascade {
    pub fn levels(&self) -> &[WeightField] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Per-level `α_l`; empty in exact mode.
    pub fn alphas(&self) -> &[AlphaEstimate] {
        &self.alphas
    }

    pub fn norm(&self) -> NormMode {
        self.norm
    }

    /// `h_l = h₁ / 2^(l−1)`.
    pub fn h_schedule(&self) -> Vec<f64> {
        (0..self.levels.len())
            .map(|l| self.h1 / f64::from(1u32 << l))
            .collect()
    }

    pub fn exp_evaluations(&self) -> u64 {
        self.levels.iter().map(|l| l.exp_evaluations()).sum()
    }

    /// Applies level `l` (0-based) to `y`, honoring the normalization mode.
    pub fn apply_level(&self, l: usize, y: &ImagePlane) -> Result<ImagePlane> {
        let w = &self.levels[l];
        w.ensure_matches(y)?;
        let sums = weighted_sums(w, y);
        Ok(match self.norm.mode {
            FilterMode::Exact => exact_from_sums(y, &sums, w.degrees()),
            FilterMode::NormFree => norm_free_from_sums(y, &sums, w.degrees(), self.alphas[l].value),
        })
    }

    /// The per-level sums and degrees the streaming route would produce.
    pub fn responses(&self, y: &ImagePlane) -> Result<LevelResponses> {
        let first = &self.levels[0];
        first.ensure_matches(y)?;
        Ok(LevelResponses {
            width: first.width(),
            height: first.height(),
            window_size: first.window_size(),
            sums: self.levels.iter().map(|w| weighted_sums(w, y)).collect(),
            degrees: self.levels.iter().map(|w| w.degrees().to_vec()).collect(),
            valid_count: first.valid_counts().to_vec(),
            exp_evaluations: self.exp_evaluations(),
        })
    }
}

pub fn build_cascade(
    y: &ImagePlane,
    params: &KernelParams,
    k: usize,
    norm: NormMode,
) -> Result<FilterCascade> {
    if k < 1 {
        return Err(invalid("level count k must be >= 1"));
    }
    norm.alpha.validate()?;
    let mut levels = Vec::with_capacity(k);
    levels.push(build_weight_field(y, params)?);
    for l in 1..k {
        let next = hadamard_square(&levels[l - 1]);
        levels.push(next);
    }
    let alphas = match norm.mode {
        FilterMode::Exact => Vec::new(),
        FilterMode::NormFree => levels
            .iter()
            .map(|w| estimate_alpha(w, norm.alpha))
            .collect::<Result<_>>()?,
    };
    Ok(FilterCascade {
        levels,
        alphas,
        norm,
        h1: params.h_y,
    })
}

/// Base, band-pass and high-pass layers of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    /// `W₁y`
    pub base: ImagePlane,
    /// `(W_{l+1} − W_l)y` for `l = 1 … k−1`
    pub bands: Vec<ImagePlane>,
    /// `(I − W_k)y`
    pub high: ImagePlane,
}

impl LayerStack {
    /// Builds the layers from the filtered images `[W₁y … W_ky]`.
    pub fn from_filtered(y: &ImagePlane, filtered: &[ImagePlane]) -> Result<Self> {
        let last = filtered
            .last()
            .ok_or_else(|| invalid("at least one filtered level required"))?;
        let bands = filtered
            .windows(2)
            .map(|pair| pair[1].zip_with(&pair[0], |fine, coarse| fine - coarse))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base: filtered[0].clone(),
            bands,
            high: y.zip_with(last, |v, f| v - f)?,
        })
    }

    pub fn level_count(&self) -> usize {
        self.bands.len() + 1
    }

    /// `base + Σ bands + high`, which telescopes back to the input.
    pub fn reconstruct(&self) -> ImagePlane {
        let mut out = self.base.clone();
        for layer in self.bands.iter().chain(std::iter::once(&self.high)) {
            for (o, &v) in out.data_mut().iter_mut().zip(layer.data()) {
                *o += v;
            }
        }
        out
    }
}

pub fn decompose(y: &ImagePlane, c: &FilterCascade) -> Result<LayerStack> {
    let filtered = (0..c.level_count())
        .map(|l| c.apply_level(l, y))
        .collect::<Result<Vec<_>>>()?;
    LayerStack::from_filtered(y, &filtered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianForm {
    /// `(W − I)y` with exact normalization.
    RandomWalk,
    /// `α(K − D)y`.
    Unnormalized,
}

pub fn laplacian_apply(
    w: &WeightField,
    y: &ImagePlane,
    form: LaplacianForm,
    alpha: f64,
) -> Result<ImagePlane> {
    w.ensure_matches(y)?;
    let sums = weighted_sums(w, y);
    match form {
        LaplacianForm::RandomWalk => {
            let z = exact_from_sums(y, &sums, w.degrees());
            z.zip_with(y, |a, b| a - b)
        }
        LaplacianForm::Unnormalized => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(invalid(format!("alpha must be > 0, got {alpha}")));
            }
            let data = y
                .data()
                .iter()
                .zip(sums.iter().zip(w.degrees()))
                .map(|(&yi, (&s, &d))| alpha * (s - d * yi))
                .collect();
            ImagePlane::new(y.width(), y.height(), data)
        }
    }
}

/// Per-level `Σ_j k_ij y_j` and `d_i` for every pixel, without the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResponses {
    pub width: usize,
    pub height: usize,
    pub window_size: usize,
    pub sums: Vec<Vec<f64>>,
    pub degrees: Vec<Vec<f64>>,
    pub valid_count: Vec<u32>,
    pub exp_evaluations: u64,
}

impl LevelResponses {
    pub fn level_count(&self) -> usize {
        self.sums.len()
    }

    /// `α_l` from level degrees. `ClosedForm` needs the full weights and is
    /// rejected here.
    pub fn alpha(&self, l: usize, strategy: AlphaStrategy) -> Result<AlphaEstimate> {
        strategy.validate()?;
        if strategy == AlphaStrategy::ClosedForm {
            return Err(invalid(
                "closed-form alpha needs materialized weights; use build_cascade",
            ));
        }
        Ok(alpha_from_degrees(&self.degrees[l], self.window_size, strategy))
    }

    /// Filters `y` with level `l`.
    pub fn filtered(&self, l: usize, y: &ImagePlane, mode: FilterMode, alpha: f64) -> ImagePlane {
        match mode {
            FilterMode::Exact => exact_from_sums(y, &self.sums[l], &self.degrees[l]),
            FilterMode::NormFree => norm_free_from_sums(y, &self.sums[l], &self.degrees[l], alpha),
        }
    }
}

/// Single pass over the image computing every level's filter response.
/// Weights are evaluated row by row and squared in place between levels.
pub fn level_responses(
    y: &ImagePlane,
    params: &KernelParams,
    levels: usize,
) -> Result<LevelResponses> {
    if levels < 1 {
        return Err(invalid("level count k must be >= 1"));
    }
    params.validate()?;
    y.ensure_finite()?;
    let (width, height) = y.dims();
    let m = params.window_size();
    let stride = 2 * levels;
    let data = y.data();
    let valid_count = compute_valid_counts(width, height, params.window_radius);

    let mut packed = vec![0.0; width * height * stride];
    let exp_evaluations = packed
        .par_chunks_mut(width * stride)
        .enumerate()
        .map_init(
            || (vec![0.0; width * m], Vec::with_capacity(m)),
            |(buf, neighbors), (row, out)| {
                let exps = fill_row(y, params, row, buf);
                for col in 0..width {
                    let slots = &mut buf[col * m..(col + 1) * m];
                    collect_neighbors(params.window_radius, width, height, col, row, neighbors);
                    let px = &mut out[col * stride..(col + 1) * stride];
                    for l in 0..levels {
                        let mut acc = 0.0;
                        for &(slot, j) in neighbors.iter() {
                            acc += slots[slot] * data[j];
                        }
                        px[2 * l] = acc;
                        px[2 * l + 1] = window_degree(slots);
                        if l + 1 < levels {
                            slots.iter_mut().for_each(|k| *k *= *k);
                        }
                    }
                }
                exps
            },
        )
        .sum();

    let mut sums = vec![Vec::with_capacity(width * height); levels];
    let mut degrees = vec![Vec::with_capacity(width * height); levels];
    for px in packed.chunks_exact(stride) {
        for l in 0..levels {
            sums[l].push(px[2 * l]);
            degrees[l].push(px[2 * l + 1]);
        }
    }
    Ok(LevelResponses {
        width,
        height,
        window_size: m,
        sums,
        degrees,
        valid_count,
        exp_evaluations,
    })
}

fn collect_neighbors(
    radius: usize,
    width: usize,
    height: usize,
    col: usize,
    row: usize,
    out: &mut Vec<(usize, usize)>,
) {
    out.clear();
    let side = 2 * radius + 1;
    for sy in 0..side {
        let jy = row as isize + sy as isize - radius as isize;
        if jy < 0 || jy as usize >= height {
            continue;
        }
        for sx in 0..side {
            let jx = col as isize + sx as isize - radius as isize;
            if jx < 0 || jx as usize >= width {
                continue;
            }
            out.push((sy * side + sx, jy as usize * width + jx as usize));
        }
    }
}
