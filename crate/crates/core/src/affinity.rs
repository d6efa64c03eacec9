//! Windowed affinity weights for the bilateral and non-local means kernels.
//!
//! Every pixel `i` owns a `(2r+1)×(2r+1)` window of un-normalized weights
//! `k_ij`, stored densely (`n·m` scalars). Windows and patches are clipped
//! at the image border: entries whose neighbor falls outside the image are
//! invalid, hold `0.0`, and are excluded from the degree `d_i` and from the
//! valid count `p_i`.
//!
//! The NLM photometric distance is the mean squared difference over the
//! mutually valid overlap of the two patches, so `h_y` keeps the same meaning
//! regardless of patch size.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::plane::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Nlm,
    Bilateral,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Nlm => "nlm",
            KernelKind::Bilateral => "bilateral",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlm" => Ok(KernelKind::Nlm),
            "bilateral" | "bl" => Ok(KernelKind::Bilateral),
            other => Err(invalid(format!("unknown kernel kind '{other}'"))),
        }
    }
}

/// Parameters of the affinity kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub kind: KernelKind,
    /// Photometric smoothing parameter, for values in `[0, 1]`.
    pub h_y: f64,
    /// Spatial smoothing parameter in pixels², used only with `spatial_term`.
    pub h_x: f64,
    pub spatial_term: bool,
    pub window_radius: usize,
    /// NLM only; ignored by the bilateral kernel.
    pub patch_radius: usize,
}

impl KernelParams {
    /// NLM kernel without a spatial term.
    pub fn nlm(window_radius: usize, patch_radius: usize, h_y: f64) -> Self {
        Self {
            kind: KernelKind::Nlm,
            h_y,
            h_x: 1.0,
            spatial_term: false,
            window_radius,
            patch_radius,
        }
    }

    /// Point-wise (bilateral range) kernel without a spatial term.
    pub fn bilateral(window_radius: usize, h_y: f64) -> Self {
        Self {
            kind: KernelKind::Bilateral,
            h_y,
            h_x: 1.0,
            spatial_term: false,
            window_radius,
            patch_radius: 0,
        }
    }

    pub fn with_spatial(mut self, h_x: f64) -> Self {
        self.spatial_term = true;
        self.h_x = h_x;
        self
    }

    /// The same kernel with every smoothing parameter divided by two, which
    /// is what squaring each weight produces.
    pub fn halved(mut self) -> Self {
        self.h_y /= 2.0;
        self.h_x /= 2.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_y > 0.0 && self.h_y.is_finite()) {
            return Err(invalid(format!("h_y must be > 0, got {}", self.h_y)));
        }
        if self.spatial_term && !(self.h_x > 0.0 && self.h_x.is_finite()) {
            return Err(invalid(format!("h_x must be > 0, got {}", self.h_x)));
        }
        if self.window_radius < 1 {
            return Err(invalid("window radius must be >= 1"));
        }
        Ok(())
    }

    #[inline]
    pub fn window_side(&self) -> usize {
        2 * self.window_radius + 1
    }

    /// Nominal window size `m`.
    #[inline]
    pub fn window_size(&self) -> usize {
        self.window_side() * self.window_side()
    }
}

/// Maps a window slot to its `(dx, dy)` displacement.
#[inline]
pub fn slot_offset(radius: usize, slot: usize) -> (isize, isize) {
    let side = 2 * radius + 1;
    let r = radius as isize;
    ((slot % side) as isize - r, (slot / side) as isize - r)
}

#[inline]
fn shifted(base: usize, delta: isize, len: usize) -> Option<usize> {
    let v = base as isize + delta;
    (v >= 0 && (v as usize) < len).then_some(v as usize)
}

/// Mean squared difference between the patches centered at `(xi, yi)` and
/// `(xj, yj)`, over the offsets valid for both.
fn patch_distance(
    y: &ImagePlane,
    q: usize,
    (xi, yi): (usize, usize),
    (xj, yj): (usize, usize),
) -> f64 {
    let (w, h) = y.dims();
    let q = q as isize;
    let lo = |a: usize, b: usize| (-q).max(-(a.min(b) as isize));
    let hi = |a: usize, b: usize, len: usize| q.min((len - 1 - a.max(b)) as isize);
    let (tx0, tx1) = (lo(xi, xj), hi(xi, xj, w));
    let (ty0, ty1) = (lo(yi, yj), hi(yi, yj, h));
    let data = y.data();
    let mut sum = 0.0;
    for ty in ty0..=ty1 {
        let ri = ((yi as isize + ty) as usize) * w;
        let rj = ((yj as isize + ty) as usize) * w;
        for tx in tx0..=tx1 {
            let a = data[ri + (xi as isize + tx) as usize];
            let b = data[rj + (xj as isize + tx) as usize];
            let d = a - b;
            sum += d * d;
        }
    }
    let count = ((tx1 - tx0 + 1) * (ty1 - ty0 + 1)) as f64;
    sum / count
}

/// Fills the weights of one image row (`width · m` slots) and returns the
/// number of exponentials evaluated.
pub(crate) fn fill_row(y: &ImagePlane, params: &KernelParams, row: usize, out: &mut [f64]) -> u64 {
    let (w, h) = y.dims();
    let m = params.window_size();
    debug_assert_eq!(out.len(), w * m);
    let inv_hy = 1.0 / params.h_y;
    let inv_hx = if params.spatial_term {
        1.0 / params.h_x
    } else {
        0.0
    };
    let data = y.data();
    let q = params.patch_radius;
    let full_patch = ((2 * q + 1) * (2 * q + 1)) as f64;
    let inside = |c: usize, len: usize| c >= q && c + q < len;
    // column sums of squared patch differences for the current offset
    let mut columns = vec![0.0; w];
    let mut exps = 0u64;
    for slot in 0..m {
        let (dx, dy) = slot_offset(params.window_radius, slot);
        let Some(jy) = shifted(row, dy, h) else {
            (0..w).for_each(|col| out[col * m + slot] = 0.0);
            continue;
        };
        let rows_inside = params.kind == KernelKind::Nlm && inside(row, h) && inside(jy, h);
        if rows_inside {
            let x0 = (-dx).max(0) as usize;
            let x1 = (w as isize - dx.max(0)).max(0) as usize;
            for (x, c) in columns.iter_mut().enumerate().take(x1).skip(x0) {
                let xj = (x as isize + dx) as usize;
                let mut acc = 0.0;
                for t in 0..=2 * q {
                    let d = data[(row + t - q) * w + x] - data[(jy + t - q) * w + xj];
                    acc += d * d;
                }
                *c = acc;
            }
        }
        let spatial = (dx * dx + dy * dy) as f64 * inv_hx;
        for col in 0..w {
            let k = &mut out[col * m + slot];
            let Some(jx) = shifted(col, dx, w) else {
                *k = 0.0;
                continue;
            };
            let value_dist = match params.kind {
                KernelKind::Bilateral => {
                    let d = data[row * w + col] - data[jy * w + jx];
                    d * d
                }
                KernelKind::Nlm if rows_inside && inside(col, w) && inside(jx, w) => {
                    columns[col - q..=col + q].iter().fold(0.0, |a, &c| a + c) / full_patch
                }
                KernelKind::Nlm => patch_distance(y, q, (col, row), (jx, jy)),
            };
            *k = (-(value_dist * inv_hy + spatial)).exp();
            exps += 1;
        }
    }
    exps
}

/// Per-pixel window stacks of un-normalized affinities with their degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) radius: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) degree: Vec<f64>,
    pub(crate) valid_count: Vec<u32>,
    pub(crate) exp_evaluations: u64,
}

impl WeightField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn window_radius(&self) -> usize {
        self.radius
    }

    /// Nominal window size `m = (2r+1)²`.
    pub fn window_size(&self) -> usize {
        (2 * self.radius + 1) * (2 * self.radius + 1)
    }

    pub fn center_slot(&self) -> usize {
        self.window_size() / 2
    }

    /// All weights, `m` consecutive slots per pixel. Invalid slots hold 0.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The `m` window weights of pixel `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.window_size();
        &self.weights[i * m..(i + 1) * m]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn valid_counts(&self) -> &[u32] {
        &self.valid_count
    }

    /// Number of `exp` calls spent producing this field (0 for derived fields).
    pub fn exp_evaluations(&self) -> u64 {
        self.exp_evaluations
    }

    /// Flat index of the neighbor in `slot` of pixel `i`, if inside the image.
    #[inline]
    pub fn neighbor(&self, i: usize, slot: usize) -> Option<usize> {
        let (dx, dy) = slot_offset(self.radius, slot);
        let jx = shifted(i % self.width, dx, self.width)?;
        let jy = shifted(i / self.width, dy, self.height)?;
        Some(jy * self.width + jx)
    }

    /// Weight `k_ij` for a valid neighbor in `slot`, `None` when clipped.
    pub fn weight(&self, i: usize, slot: usize) -> Option<f64> {
        self.neighbor(i, slot)
            .map(|_| self.weights[i * self.window_size() + slot])
    }

    /// Rebuilds the field with each valid weight passed through `f(i, j, k_ij)`.
    /// Degrees are recomputed; clipped slots stay zero.
    pub fn map_weights(&self, f: impl Fn(usize, usize, f64) -> f64) -> WeightField {
        let m = self.window_size();
        let mut weights = self.weights.clone();
        for i in 0..self.pixels() {
            for slot in 0..m {
                if let Some(j) = self.neighbor(i, slot) {
                    let k = &mut weights[i * m + slot];
                    *k = f(i, j, *k);
                }
            }
        }
        let mut field = WeightField {
            weights,
            degree: Vec::new(),
            exp_evaluations: 0,
            ..self.clone()
        };
        field.degree = compute_degrees(&field.weights, m);
        field
    }

    pub(crate) fn ensure_matches(&self, y: &ImagePlane) -> Result<()> {
        y.ensure_dims(self.width, self.height)
    }
}

pub(crate) fn compute_degrees(weights: &[f64], m: usize) -> Vec<f64> {
    weights.par_chunks(m).map(window_degree).collect()
}

/// Sum of one window in slot order; clipped slots contribute `+0.0`.
#[inline]
pub(crate) fn window_degree(slots: &[f64]) -> f64 {
    slots.iter().fold(0.0, |acc, &k| acc + k)
}

pub(crate) fn compute_valid_counts(width: usize, height: usize, radius: usize) -> Vec<u32> {
    let span = |c: usize, len: usize| {
        let lo = c.saturating_sub(radius);
        let hi = (c + radius).min(len - 1);
        (hi - lo + 1) as u32
    };
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let sy = span(row, height);
        for col in 0..width {
            out.push(sy * span(col, width));
        }
    }
    out
}

/// Evaluates the kernel over every window of `y`.
pub fn build_weight_field(y: &ImagePlane, params: &KernelParams) -> Result<WeightField> {
    params.validate()?;
    y.ensure_finite()?;
    let (width, height) = y.dims();
    let m = params.window_size();
    let mut weights = vec![0.0; width * height * m];
    let exp_evaluations = weights
        .par_chunks_mut(width * m)
        .enumerate()
        .map(|(row, chunk)| fill_row(y, params, row, chunk))
        .sum();
    let degree = compute_degrees(&weights, m);
    Ok(WeightField {
        width,
        height,
        radius: params.window_radius,
        weights,
        degree,
        valid_count: compute_valid_counts(width, height, params.window_radius),
        exp_evaluations,
    })
}

/// Degree statistics: `s1 = Σ d_i`, `s2 = Σ d_i²`, `d_bar = s1 / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub s1: f64,
    pub s2: f64,
    pub d_bar: f64,
    pub n: usize,
    pub m: usize,
}

pub fn field_stats(w: &WeightField) -> FieldStats {
    degree_stats(w.degrees(), w.window_size())
}

pub(crate) fn degree_stats(degrees: &[f64], m: usize) -> FieldStats {
    let (s1, s2) = degrees
        .iter()
        .fold((0.0, 0.0), |(s1, s2), &d| (s1 + d, s2 + d * d));
    let n = degrees.len();
    FieldStats {
        s1,
        s2,
        d_bar: s1 / n as f64,
        n,
        m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn constant_image_has_unit_weights() {
        let y = ImagePlane::filled(5, 4, 0.3).unwrap();
        let w = build_weight_field(&y, &KernelParams::nlm(2, 1, 0.7)).unwrap();
        for i in 0..w.pixels() {
            for slot in 0..w.window_size() {
                if let Some(k) = w.weight(i, slot) {
                    assert_eq!(k, 1.0);
                }
            }
            assert_eq!(w.degrees()[i], w.valid_counts()[i] as f64);
        }
    }

    #[test]
    fn two_pixel_analytic() {
        let y = ImagePlane::new(2, 1, vec![0.0, 1.0]).unwrap();
        let w = build_weight_field(&y, &KernelParams::nlm(1, 0, 1.0)).unwrap();
        let right = 5; // (dx, dy) = (1, 0) in a 3x3 window
        assert_eq!(slot_offset(1, right), (1, 0));
        let k12 = w.weight(0, right).unwrap();
        assert!((k12 - (-1.0f64).exp()).abs() < 1e-15);
        assert!((k12 - 0.367879).abs() < 1e-6);
        assert!((w.degrees()[0] - (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(w.valid_counts(), &[2, 2]);
    }

    #[test]
    fn border_valid_counts() {
        let counts = compute_valid_counts(4, 3, 1);
        assert_eq!(counts, vec![4, 6, 6, 4, 6, 9, 9, 6, 4, 6, 6, 4]);
    }

    #[test]
    fn rejects_bad_input() {
        let y = ImagePlane::new(2, 1, vec![0.0, f64::NAN]).unwrap();
        assert_eq!(
            build_weight_field(&y, &KernelParams::nlm(1, 0, 1.0)),
            Err(Error::NonFiniteInput)
        );
        let y = ImagePlane::filled(2, 2, 0.5).unwrap();
        assert!(build_weight_field(&y, &KernelParams::nlm(1, 0, 0.0)).is_err());
        assert!(build_weight_field(&y, &KernelParams::nlm(0, 0, 1.0)).is_err());
        assert!(build_weight_field(&y, &KernelParams::bilateral(1, 1.0).with_spatial(-1.0)).is_err());
    }

    #[test]
    fn exp_count_equals_valid_pairs() {
        let y = ImagePlane::from_fn(7, 5, |x, y| ((x * 3 + y) % 5) as f64 / 5.0).unwrap();
        let w = build_weight_field(&y, &KernelParams::nlm(2, 1, 0.7)).unwrap();
        let pairs: u64 = w.valid_counts().iter().map(|&p| p as u64).sum();
        assert_eq!(w.exp_evaluations(), pairs);
    }

    #[test]
    fn field_stats_isolated_and_global() {
        let y = ImagePlane::from_fn(4, 4, |x, y| (x + 4 * y) as f64 / 16.0).unwrap();
        let w = build_weight_field(&y, &KernelParams::nlm(1, 1, 0.7)).unwrap();
        let isolated = w.map_weights(|i, j, k| if i == j { k } else { 0.0 });
        let s = field_stats(&isolated);
        assert_eq!((s.s1, s.s2, s.d_bar), (16.0, 16.0, 1.0));

        // constant image, window covering the whole image: d_i = n
        let y = ImagePlane::filled(3, 2, 0.4).unwrap();
        let w = build_weight_field(&y, &KernelParams::nlm(2, 1, 0.7)).unwrap();
        let s = field_stats(&w);
        assert_eq!((s.s1, s.s2, s.d_bar, s.n), (36.0, 216.0, 6.0, 6));
    }

    #[test]
    fn spatial_term_attenuates_far_neighbors() {
        let y = ImagePlane::filled(5, 5, 0.5).unwrap();
        let w = build_weight_field(&y, &KernelParams::bilateral(2, 0.1).with_spatial(2.0)).unwrap();
        let center = 12;
        let k = |slot| w.weight(center, slot).unwrap();
        // slot 13 is (1,0), slot 14 is (2,0)
        assert!((k(13) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k(14) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(k(12), 1.0);
    }
}
