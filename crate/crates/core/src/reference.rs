//! Dense brute-force oracles for tiny images.
//!
//! Everything here assembles full `n×n` matrices from an independent
//! double-loop kernel evaluation and is refused above [`MAX_DENSE_PIXELS`].
//! Nothing in the fast path calls into this module; it exists to check the
//! windowed code and is exposed on the command line through `--verify`.

#![allow(clippy::needless_range_loop)]

use crate::affinity::{build_weight_field, field_stats, KernelKind, KernelParams};
use crate::cascade::{build_cascade, hadamard_square};
use crate::error::{Error, Result};
use crate::normfilter::{
    apply_exact, apply_norm_free, estimate_alpha, trace_terms, AlphaStrategy, FilterMode,
    NormMode, TraceTerms,
};
use crate::pipeline::{enhance_plane_detailed, preset_config, EnhanceConfig, Preset};
use crate::plane::ImagePlane;
use crate::tonemap::make_curve;

pub const MAX_DENSE_PIXELS: usize = 4096;

fn guard(y: &ImagePlane) -> Result<()> {
    if y.len() > MAX_DENSE_PIXELS {
        return Err(Error::TooLarge {
            pixels: y.len(),
            max: MAX_DENSE_PIXELS,
        });
    }
    Ok(())
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `max |A − Aᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn combine(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// Kernel value between pixels `i` and `j` (row-major indices), or `None`
/// when `j` lies outside `i`'s window. Evaluated from scratch every call.
pub fn pair_affinity(y: &ImagePlane, params: &KernelParams, i: usize, j: usize) -> Option<f64> {
    let w = y.width() as isize;
    let h = y.height() as isize;
    let (xi, yi) = ((i as isize) % w, (i as isize) / w);
    let (xj, yj) = ((j as isize) % w, (j as isize) / w);
    let (dx, dy) = (xj - xi, yj - yi);
    let r = params.window_radius as isize;
    if dx.abs() > r || dy.abs() > r {
        return None;
    }
    let inside = |x: isize, y: isize| x >= 0 && x < w && y >= 0 && y < h;
    let value_dist = match params.kind {
        KernelKind::Bilateral => {
            let d = y.get(xi as usize, yi as usize) - y.get(xj as usize, yj as usize);
            d * d
        }
        KernelKind::Nlm => {
            let q = params.patch_radius as isize;
            let mut sum = 0.0;
            let mut count = 0usize;
            for ty in -q..=q {
                for tx in -q..=q {
                    let (ax, ay, bx, by) = (xi + tx, yi + ty, xj + tx, yj + ty);
                    if inside(ax, ay) && inside(bx, by) {
                        let d = y.get(ax as usize, ay as usize) - y.get(bx as usize, by as usize);
                        sum += d * d;
                        count += 1;
                    }
                }
            }
            sum / count as f64
        }
    };
    let spatial = if params.spatial_term {
        ((dx * dx + dy * dy) as f64) / params.h_x
    } else {
        0.0
    };
    Some((-(value_dist / params.h_y + spatial)).exp())
}

/// Dense `K` (zeros outside windows) and the degrees `d_i`.
pub fn dense_kernel(y: &ImagePlane, params: &KernelParams) -> Result<(DenseMatrix, Vec<f64>)> {
    guard(y)?;
    params.validate()?;
    y.ensure_finite()?;
    let n = y.len();
    let mut k = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if let Some(v) = pair_affinity(y, params, i, j) {
                k.set(i, j, v);
            }
        }
    }
    let d = k.row_sums();
    Ok((k, d))
}

/// Number of in-image pixels within each pixel's window.
pub fn dense_valid_counts(y: &ImagePlane, radius: usize) -> Vec<usize> {
    let (w, h) = y.dims();
    let r = radius as isize;
    (0..w * h)
        .map(|i| {
            let (x, yy) = ((i % w) as isize, (i / w) as isize);
            (0..w * h)
                .filter(|&j| {
                    let (xj, yj) = ((j % w) as isize, (j / w) as isize);
                    (xj - x).abs() <= r && (yj - yy).abs() <= r
                })
                .count()
        })
        .collect()
}

/// A dense filter matrix with its normalization mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFilter {
    pub matrix: DenseMatrix,
    pub mode: FilterMode,
}

impl DenseFilter {
    pub fn apply(&self, y: &ImagePlane) -> Result<ImagePlane> {
        ImagePlane::new(y.width(), y.height(), self.matrix.mul_vec(y.data()))
    }
}

/// `D⁻¹K` (exact) or `I + α(K − D)` (norm-free).
pub fn dense_assemble(
    y: &ImagePlane,
    params: &KernelParams,
    mode: FilterMode,
    alpha: f64,
) -> Result<DenseFilter> {
    let (k, d) = dense_kernel(y, params)?;
    Ok(DenseFilter {
        matrix: filter_from_kernel(&k, &d, mode, alpha),
        mode,
    })
}

fn filter_from_kernel(k: &DenseMatrix, d: &[f64], mode: FilterMode, alpha: f64) -> DenseMatrix {
    let n = k.size();
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = match mode {
                FilterMode::Exact => k.get(i, j) / d[i],
                FilterMode::NormFree => {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    delta + alpha * (k.get(i, j) - delta * d[i])
                }
            };
            out.set(i, j, v);
        }
    }
    out
}

/// Traces entering the closed-form `α`, from explicit matrix products.
pub fn dense_traces(y: &ImagePlane, params: &KernelParams) -> Result<TraceTerms> {
    let (k, d) = dense_kernel(y, params)?;
    let n = k.size();
    let mut dm = DenseMatrix::zeros(n);
    let mut dinv = DenseMatrix::zeros(n);
    for i in 0..n {
        dm.set(i, i, d[i]);
        dinv.set(i, i, 1.0 / d[i]);
    }
    Ok(TraceTerms {
        k_dinv_k: k.mul(&dinv).mul(&k).trace(),
        k: k.trace(),
        d: dm.trace(),
        k_squared: k.mul(&k).trace(),
        kd: k.mul(&dm).trace(),
        d_squared: dm.mul(&dm).trace(),
    })
}

/// Uniform `α` grid `lo + i·(hi − lo)/steps`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl AlphaGrid {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.steps as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusScan {
    pub alpha_star: f64,
    pub alphas: Vec<f64>,
    pub j_values: Vec<f64>,
}

fn objective(exact: &DenseMatrix, k: &DenseMatrix, d: &[f64], alpha: f64) -> f64 {
    let approx = filter_from_kernel(k, d, FilterMode::NormFree, alpha);
    exact
        .combine(&approx, |a, b| (a - b) * (a - b))
        .as_slice()
        .iter()
        .sum()
}

/// `J(α) = ‖W − Ŵ(α)‖²_F`.
pub fn frobenius_objective(y: &ImagePlane, params: &KernelParams, alpha: f64) -> Result<f64> {
    let (k, d) = dense_kernel(y, params)?;
    let exact = filter_from_kernel(&k, &d, FilterMode::Exact, 0.0);
    Ok(objective(&exact, &k, &d, alpha))
}

/// `J(α)` over the grid, by brute force.
pub fn frobenius_scan(y: &ImagePlane, params: &KernelParams, grid: AlphaGrid) -> Result<FrobeniusScan> {
    if grid.steps == 0 || !grid.lo.is_finite() || !grid.hi.is_finite() || grid.hi <= grid.lo {
        return Err(Error::EmptyGrid);
    }
    let (k, d) = dense_kernel(y, params)?;
    let exact = filter_from_kernel(&k, &d, FilterMode::Exact, 0.0);
    let mut alphas = Vec::with_capacity(grid.steps + 1);
    let mut j_values = Vec::with_capacity(grid.steps + 1);
    for s in 0..=grid.steps {
        let alpha = grid.point(s);
        alphas.push(alpha);
        j_values.push(objective(&exact, &k, &d, alpha));
    }
    let best = j_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    Ok(FrobeniusScan {
        alpha_star: alphas[best],
        alphas,
        j_values,
    })
}

/// `W^k y` by repeated dense multiplication with the exact filter.
pub fn diffusion_power(y: &ImagePlane, params: &KernelParams, k: usize) -> Result<ImagePlane> {
    if k < 1 {
        return Err(crate::error::invalid("diffusion power k must be >= 1"));
    }
    let w = dense_assemble(y, params, FilterMode::Exact, 0.0)?;
    let mut v = y.data().to_vec();
    for _ in 0..k {
        v = w.matrix.mul_vec(&v);
    }
    ImagePlane::new(y.width(), y.height(), v)
}

/// Kernel parameters of level `l` (0-based): `h / 2^l`.
pub fn level_params(params: &KernelParams, l: usize) -> KernelParams {
    let mut p = *params;
    for _ in 0..l {
        p = p.halved();
    }
    p
}

fn dense_alpha(k: &DenseMatrix, d: &[f64], strategy: AlphaStrategy) -> f64 {
    let n = d.len() as f64;
    let s1: f64 = d.iter().sum();
    let s2: f64 = d.iter().map(|v| v * v).sum();
    match strategy {
        AlphaStrategy::InverseMeanDegree => n / s1,
        AlphaStrategy::TraceRatio => s1 / s2,
        AlphaStrategy::Fixed(v) => v,
        AlphaStrategy::ClosedForm => {
            // direct Frobenius least squares: A = W − I, B = K − D, α = ⟨A,B⟩/⟨B,B⟩
            let size = k.size();
            let (mut ab, mut bb) = (0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let a = k.get(i, j) / d[i] - delta;
                    let b = k.get(i, j) - delta * d[i];
                    ab += a * b;
                    bb += b * b;
                }
            }
            if bb <= crate::normfilter::DEGENERATE_DENOMINATOR {
                n / s1
            } else {
                ab / bb
            }
        }
    }
}

/// Layers, mask and output of the dense hand-composed chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEnhance {
    pub base: ImagePlane,
    pub bands: Vec<ImagePlane>,
    pub high: ImagePlane,
    pub mask: ImagePlane,
    pub output: ImagePlane,
}

/// The full enhancement chain with every level built explicitly at its own
/// `h` and applied as a dense matrix.
pub fn dense_enhance(y: &ImagePlane, cfg: &EnhanceConfig) -> Result<DenseEnhance> {
    cfg.validate()?;
    let (w, h) = y.dims();
    let mut filtered = Vec::with_capacity(cfg.levels);
    let mut degrees = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let (k, d) = dense_kernel(y, &level_params(&cfg.kernel, l))?;
        let alpha = match cfg.norm.mode {
            FilterMode::Exact => 0.0,
            FilterMode::NormFree => dense_alpha(&k, &d, cfg.norm.alpha),
        };
        let f = filter_from_kernel(&k, &d, cfg.norm.mode, alpha);
        filtered.push(f.mul_vec(y.data()));
        degrees.push(d);
    }
    let plane = |v: Vec<f64>| ImagePlane::new(w, h, v);
    let base = plane(filtered[0].clone())?;
    let bands = (1..cfg.levels)
        .map(|l| plane(filtered[l].iter().zip(&filtered[l - 1]).map(|(a, b)| a - b).collect()))
        .collect::<Result<Vec<_>>>()?;
    let last = &filtered[cfg.levels - 1];
    let high = plane(y.data().iter().zip(last).map(|(a, b)| a - b).collect())?;

    let p = dense_valid_counts(y, cfg.kernel.window_radius);
    let mask_values: Vec<f64> = degrees[cfg.mask_source_level - 1]
        .iter()
        .zip(&p)
        .map(|(&d, &p)| (1.0 - d / p as f64).powf(cfg.mask_gamma))
        .collect();
    let curves = cfg.curves.iter().map(make_curve).collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let gate = if cfg.mask_enabled { mask_values[i] } else { 1.0 };
        let mut z = curves[0].eval(base.data()[i]);
        for (b, band) in bands.iter().enumerate() {
            z += gate * curves[b + 1].eval(band.data()[i]);
        }
        z += gate * curves[cfg.levels].eval(high.data()[i]);
        out.push(z.clamp(0.0, 1.0));
    }
    Ok(DenseEnhance {
        base,
        bands,
        high,
        mask: plane(mask_values)?,
        output: plane(out)?,
    })
}

/// A built-in tiny test image with the kernel it is checked under.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub image: ImagePlane,
    pub kernel: KernelParams,
}

/// Five fixed 1×N and 4×4 images.
pub fn fixtures() -> Vec<Fixture> {
    let row = |v: Vec<f64>| ImagePlane::new(v.len(), 1, v).expect("non-empty fixture");
    let square = |f: fn(usize, usize) -> f64| ImagePlane::from_fn(4, 4, f).expect("4x4 fixture");
    vec![
        Fixture {
            name: "step-1x4",
            image: row(vec![0.0, 0.0, 1.0, 1.0]),
            kernel: KernelParams::nlm(3, 0, 1.0),
        },
        Fixture {
            name: "ramp-1x8",
            image: row((0..8).map(|i| i as f64 / 7.0).collect()),
            kernel: KernelParams::nlm(2, 1, 0.7),
        },
        Fixture {
            name: "spikes-1x7",
            image: row(vec![0.2, 0.8, 0.25, 0.3, 0.9, 0.1, 0.5]),
            kernel: KernelParams::bilateral(2, 0.3).with_spatial(4.0),
        },
        Fixture {
            name: "checker-4x4",
            image: square(|x, y| if (x + y) % 2 == 0 { 0.15 } else { 0.85 }),
            kernel: KernelParams::nlm(2, 1, 0.7),
        },
        Fixture {
            name: "edge-4x4",
            image: square(|x, y| {
                let base = if x >= 2 { 0.8 } else { 0.2 };
                base + 0.03 * ((x * 7 + y * 3) % 5) as f64
            }),
            kernel: KernelParams::nlm(1, 1, 0.5),
        },
    ]
}

/// Outcome of one `--verify` check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: String, error: f64, tol: f64) -> Check {
    Check {
        passed: error <= tol,
        detail: format!("error {error:.3e} (tol {tol:.0e})"),
        name,
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn fixture_checks(fx: &Fixture) -> Result<Vec<Check>> {
    let y = &fx.image;
    let params = &fx.kernel;
    let name = |what: &str| format!("{}: {what}", fx.name);
    let mut out = Vec::new();

    let field = build_weight_field(y, params)?;
    let (k, d) = dense_kernel(y, params)?;
    let mut weight_err = 0.0f64;
    for i in 0..field.pixels() {
        for slot in 0..field.window_size() {
            if let (Some(j), Some(v)) = (field.neighbor(i, slot), field.weight(i, slot)) {
                weight_err = weight_err.max((v - k.get(i, j)).abs());
            }
        }
    }
    out.push(check(name("weights vs brute force"), weight_err, 1e-12));
    out.push(check(name("degrees vs dense row sums"), max_diff(field.degrees(), &d), 1e-12));

    let exact = dense_assemble(y, params, FilterMode::Exact, 0.0)?;
    let z = apply_exact(&field, y)?;
    out.push(check(
        name("exact filter vs dense D^-1 K"),
        max_diff(z.data(), exact.apply(y)?.data()),
        1e-10,
    ));

    let stats = field_stats(&field);
    for scale in [0.1, 1.0, 10.0] {
        let alpha = scale / stats.d_bar;
        let approx = dense_assemble(y, params, FilterMode::NormFree, alpha)?;
        let zf = apply_norm_free(&field, y, alpha)?;
        let row_err = approx.matrix.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        out.push(check(
            name(&format!("norm-free filter vs dense, alpha={scale}/dbar")),
            max_diff(zf.data(), approx.apply(y)?.data()),
            1e-10,
        ));
        out.push(check(name(&format!("norm-free row sums, alpha={scale}/dbar")), row_err, 1e-6));
        out.push(check(
            name(&format!("norm-free symmetry, alpha={scale}/dbar")),
            approx.matrix.max_asymmetry(),
            1e-9,
        ));
    }

    let windowed = trace_terms(&field);
    let dense = dense_traces(y, params)?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let trace_err = [
        rel(windowed.k_dinv_k, dense.k_dinv_k),
        rel(windowed.k, dense.k),
        rel(windowed.d, dense.d),
        rel(windowed.k_squared, dense.k_squared),
        rel(windowed.kd, dense.kd),
        rel(windowed.d_squared, dense.d_squared),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(check(name("windowed traces vs dense"), trace_err, 1e-9));

    let closed = estimate_alpha(&field, AlphaStrategy::ClosedForm)?;
    let grid = AlphaGrid {
        lo: 0.0,
        hi: 2.0 / stats.d_bar,
        steps: 10_000,
    };
    let scan = frobenius_scan(y, params, grid)?;
    out.push(check(
        name("closed-form alpha vs Frobenius scan"),
        (closed.value - scan.alpha_star).abs() / grid.step(),
        1.0,
    ));
    let ratio = stats.s1 / stats.s2;
    let lower = 1.0 / (stats.m * stats.n) as f64;
    out.push(Check {
        name: name("1/(mn) <= s1/s2 <= 1/dbar"),
        passed: lower <= ratio && ratio <= 1.0 / stats.d_bar,
        detail: format!("{lower:.4e} <= {ratio:.4e} <= {:.4e}", 1.0 / stats.d_bar),
    });

    let squared = hadamard_square(&field);
    let half = build_weight_field(y, &params.halved())?;
    out.push(check(
        name("squared field vs explicit h/2"),
        max_diff(squared.weights(), half.weights()),
        1e-9,
    ));

    let twice = apply_exact(&field, &apply_exact(&field, y)?)?;
    out.push(check(
        name("diffusion power k=2 vs exact filter twice"),
        max_diff(diffusion_power(y, params, 2)?.data(), twice.data()),
        1e-10,
    ));

    let cascade = build_cascade(y, params, 2, NormMode::EXACT)?;
    let fast_layers = crate::cascade::decompose(y, &cascade)?;
    let mut cfg = preset_config(Preset::Identity);
    cfg.kernel = *params;
    cfg.norm = NormMode::EXACT;
    let dense_layers = dense_enhance(y, &cfg)?;
    out.push(check(
        name("layers vs dense chain"),
        max_diff(fast_layers.base.data(), dense_layers.base.data())
            .max(max_diff(fast_layers.bands[0].data(), dense_layers.bands[0].data()))
            .max(max_diff(fast_layers.high.data(), dense_layers.high.data())),
        1e-9,
    ));

    for preset in [Preset::Sharpen, Preset::DenoiseSharpen, Preset::Smooth] {
        let mut cfg = preset_config(preset);
        cfg.kernel = *params;
        cfg.norm = NormMode::EXACT;
        let fast = enhance_plane_detailed(y, &cfg)?;
        let dense = dense_enhance(y, &cfg)?;
        out.push(check(
            name(&format!("{} end-to-end vs dense chain", preset.name())),
            max_diff(fast.output.data(), dense.output.data()),
            1e-6,
        ));
    }
    Ok(out)
}

/// Runs every oracle check over the built-in fixtures.
pub fn verify_suite() -> Vec<Check> {
    let mut out = Vec::new();
    for fx in fixtures() {
        match fixture_checks(&fx) {
            Ok(mut checks) => out.append(&mut checks),
            Err(e) => out.push(Check {
                name: format!("{}: run", fx.name),
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    out
}
