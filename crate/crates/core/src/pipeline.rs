//! End-to-end enhancement: color routing, filter bank, decomposition,
//! per-layer curves, structure mask and blend.

use std::fmt;
use std::str::FromStr;

use crate::affinity::KernelParams;
use crate::cascade::{build_cascade, level_responses, LayerStack, LevelResponses};
use crate::error::{invalid, Error, Result};
use crate::maskblend::{blend, StructureMask};
use crate::normfilter::{AlphaStrategy, FilterMode, NormMode};
use crate::plane::{ColorImage, ImagePlane};
use crate::tonemap::{apply_curve, make_curve, CurveDomain, CurveSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    /// Enhance BT.601 full-range luma, pass chroma through.
    LumaOnly,
    PerChannelRgb,
}

impl fmt::Display for ColorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorMode::LumaOnly => "luma",
            ColorMode::PerChannelRgb => "rgb",
        })
    }
}

impl FromStr for ColorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "luma" | "luma_only" | "yuv" => Ok(ColorMode::LumaOnly),
            "rgb" | "per_channel_rgb" => Ok(ColorMode::PerChannelRgb),
            other => Err(invalid(format!("unknown color mode '{other}'"))),
        }
    }
}

/// Full parameter set of one enhancement run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    pub kernel: KernelParams,
    /// Number of filter levels `k`.
    pub levels: usize,
    pub norm: NormMode,
    /// `k + 1` curves: base, `k − 1` bands from coarse to fine, high.
    pub curves: Vec<CurveSpec>,
    pub mask_enabled: bool,
    /// 1-based level whose degrees drive the mask.
    pub mask_source_level: usize,
    pub mask_gamma: f64,
    pub color_mode: ColorMode,
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.levels < 1 {
            return Err(invalid("level count k must be >= 1"));
        }
        if self.curves.len() != self.levels + 1 {
            return Err(invalid(format!(
                "expected {} curves for k = {}, got {}",
                self.levels + 1,
                self.levels,
                self.curves.len()
            )));
        }
        if !(1..=self.levels).contains(&self.mask_source_level) {
            return Err(invalid(format!(
                "mask source level {} outside 1..={}",
                self.mask_source_level, self.levels
            )));
        }
        if !(self.mask_gamma > 0.0 && self.mask_gamma.is_finite()) {
            return Err(invalid("mask gamma must be > 0"));
        }
        self.norm.alpha.validate()?;
        self.curves.iter().try_for_each(CurveSpec::validate)
    }

    /// Changes `k`, keeping the base, high and leading band curves; new bands
    /// get identity curves.
    pub fn set_levels(&mut self, levels: usize) -> Result<()> {
        if levels < 1 {
            return Err(invalid("level count k must be >= 1"));
        }
        let base = self.curves.first().copied().unwrap_or(CurveSpec::identity(CurveDomain::Base));
        let high = if self.curves.len() >= 2 {
            *self.curves.last().expect("non-empty")
        } else {
            CurveSpec::identity(CurveDomain::SignedDetail)
        };
        let old_bands: Vec<CurveSpec> = if self.curves.len() > 2 {
            self.curves[1..self.curves.len() - 1].to_vec()
        } else {
            Vec::new()
        };
        let mut curves = vec![base];
        for b in 0..levels - 1 {
            curves.push(
                old_bands
                    .get(b)
                    .copied()
                    .unwrap_or(CurveSpec::identity(CurveDomain::SignedDetail)),
            );
        }
        curves.push(high);
        self.curves = curves;
        self.levels = levels;
        self.mask_source_level = self.mask_source_level.min(levels);
        Ok(())
    }

    /// Name of layer `index` in `curves`: `base`, `band1`…, `high`.
    pub fn layer_name(&self, index: usize) -> String {
        layer_name(index, self.levels)
    }
}

pub(crate) fn layer_name(index: usize, levels: usize) -> String {
    if index == 0 {
        "base".to_string()
    } else if index == levels {
        "high".to_string()
    } else {
        format!("band{index}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Smooth,
    Sharpen,
    DenoiseSharpen,
    /// All curves identity, mask off; reproduces the input.
    Identity,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Smooth,
        Preset::Sharpen,
        Preset::DenoiseSharpen,
        Preset::Identity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Smooth => "smooth",
            Preset::Sharpen => "sharpen",
            Preset::DenoiseSharpen => "denoise_sharpen",
            Preset::Identity => "identity",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Preset::Smooth),
            "sharpen" => Ok(Preset::Sharpen),
            "denoise_sharpen" | "denoise-sharpen" => Ok(Preset::DenoiseSharpen),
            "identity" => Ok(Preset::Identity),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Kernel shared by every preset: 5×5 NLM window, 3×3 patches, `h₁ = 0.7`,
/// no spatial term.
pub fn default_kernel() -> KernelParams {
    KernelParams::nlm(2, 1, 0.7)
}

pub fn resolve_preset(name: &str) -> Result<EnhanceConfig> {
    Ok(preset_config(name.parse()?))
}

pub fn preset_config(preset: Preset) -> EnhanceConfig {
    use CurveDomain::{Base, SignedDetail as Signed};
    // curves: [base, medium band, fine/high]
    let (curves, mask_enabled) = match preset {
        Preset::Smooth => (
            vec![
                CurveSpec::identity(Base),
                CurveSpec::s_curve(10.0, 0.2, Signed),
                CurveSpec::linear_gain(0.0, Signed),
            ],
            false,
        ),
        Preset::Sharpen => (
            vec![
                CurveSpec::s_curve(6.0, 0.75, Base),
                CurveSpec::s_curve(50.0, 0.33, Signed),
                CurveSpec::s_curve(20.0, 0.66, Signed),
            ],
            true,
        ),
        Preset::DenoiseSharpen => (
            vec![
                CurveSpec::s_curve(5.0, 0.75, Base),
                CurveSpec::s_curve(60.0, 0.45, Signed),
                CurveSpec::inverse_s_curve(10.0, 1.0, Signed),
            ],
            true,
        ),
        Preset::Identity => (
            vec![
                CurveSpec::identity(Base),
                CurveSpec::identity(Signed),
                CurveSpec::identity(Signed),
            ],
            false,
        ),
    };
    EnhanceConfig {
        kernel: default_kernel(),
        levels: 2,
        norm: NormMode::FAST,
        curves,
        mask_enabled,
        mask_source_level: 1,
        mask_gamma: 1.0,
        color_mode: ColorMode::LumaOnly,
    }
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        preset_config(Preset::Identity)
    }
}

/// Everything produced while enhancing one plane.
#[derive(Debug, Clone)]
pub struct PlaneResult {
    pub output: ImagePlane,
    pub layers: LayerStack,
    /// Structure mask of the configured source level (computed even when
    /// the blend does not use it).
    pub mask: StructureMask,
    pub mask_applied: bool,
    /// Level-1 `d_i / p_i`.
    pub normalized_degrees: ImagePlane,
    /// Per-level `α_l` in norm-free mode.
    pub alphas: Vec<f64>,
    pub exp_evaluations: u64,
}

/// Per-level responses and `α_l`. The closed-form `α` needs materialized
/// weights; every other strategy takes the streaming route.
fn filter_bank(y: &ImagePlane, cfg: &EnhanceConfig) -> Result<(LevelResponses, Vec<f64>)> {
    if cfg.norm.mode == FilterMode::NormFree && cfg.norm.alpha == AlphaStrategy::ClosedForm {
        let cascade = build_cascade(y, &cfg.kernel, cfg.levels, cfg.norm)?;
        let alphas = cascade.alphas().iter().map(|a| a.value).collect();
        return Ok((cascade.responses(y)?, alphas));
    }
    let responses = level_responses(y, &cfg.kernel, cfg.levels)?;
    let alphas = match cfg.norm.mode {
        FilterMode::Exact => Vec::new(),
        FilterMode::NormFree => (0..responses.level_count())
            .map(|l| responses.alpha(l, cfg.norm.alpha).map(|a| a.value))
            .collect::<Result<_>>()?,
    };
    Ok((responses, alphas))
}

/// Runs the full chain on one plane and keeps the intermediates.
pub fn enhance_plane_detailed(y: &ImagePlane, cfg: &EnhanceConfig) -> Result<PlaneResult> {
    cfg.validate()?;
    let (responses, alphas) = filter_bank(y, cfg)?;
    let filtered: Vec<ImagePlane> = (0..cfg.levels)
        .map(|l| {
            let alpha = alphas.get(l).copied().unwrap_or(f64::NAN);
            responses.filtered(l, y, cfg.norm.mode, alpha)
        })
        .collect();
    let layers = LayerStack::from_filtered(y, &filtered)?;

    let curves = cfg
        .curves
        .iter()
        .map(make_curve)
        .collect::<Result<Vec<_>>>()?;
    let mapped_base = apply_curve(&curves[0], &layers.base);
    let mapped_bands: Vec<ImagePlane> = layers
        .bands
        .iter()
        .zip(&curves[1..cfg.levels])
        .map(|(band, c)| apply_curve(c, band))
        .collect();
    let mapped_high = apply_curve(&curves[cfg.levels], &layers.high);

    let (w, h) = y.dims();
    let src = cfg.mask_source_level - 1;
    let mask = StructureMask::from_degrees(w, h, &responses.degrees[src], &responses.valid_count)?
        .with_gamma(cfg.mask_gamma)?;
    let output = blend(
        &mapped_base,
        &mapped_bands,
        &mapped_high,
        cfg.mask_enabled.then_some(&mask),
    )?;
    let normalized_degrees = ImagePlane::new(
        w,
        h,
        responses.degrees[0]
            .iter()
            .zip(&responses.valid_count)
            .map(|(&d, &p)| d / f64::from(p))
            .collect(),
    )?;
    Ok(PlaneResult {
        output,
        layers,
        mask,
        mask_applied: cfg.mask_enabled,
        normalized_degrees,
        alphas,
        exp_evaluations: responses.exp_evaluations,
    })
}

pub fn enhance_plane(y: &ImagePlane, cfg: &EnhanceConfig) -> Result<ImagePlane> {
    Ok(enhance_plane_detailed(y, cfg)?.output)
}

/// BT.601 full-range RGB → (Y, Cb, Cr), chroma centred at 0.5.
pub fn rgb_to_ycbcr(r: &ImagePlane, g: &ImagePlane, b: &ImagePlane) -> Result<[ImagePlane; 3]> {
    r.ensure_same_dims(g)?;
    r.ensure_same_dims(b)?;
    let n = r.len();
    let (mut y, mut cb, mut cr) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let (rv, gv, bv) = (r.data()[i], g.data()[i], b.data()[i]);
        let luma = 0.299 * rv + 0.587 * gv + 0.114 * bv;
        y.push(luma);
        cb.push((bv - luma) / 1.772 + 0.5);
        cr.push((rv - luma) / 1.402 + 0.5);
    }
    let (w, h) = r.dims();
    Ok([
        ImagePlane::new(w, h, y)?,
        ImagePlane::new(w, h, cb)?,
        ImagePlane::new(w, h, cr)?,
    ])
}

/// Inverse of [`rgb_to_ycbcr`]. Not clamped.
pub fn ycbcr_to_rgb(y: &ImagePlane, cb: &ImagePlane, cr: &ImagePlane) -> Result<[ImagePlane; 3]> {
    y.ensure_same_dims(cb)?;
    y.ensure_same_dims(cr)?;
    let n = y.len();
    let (mut r, mut g, mut b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let luma = y.data()[i];
        let rv = luma + 1.402 * (cr.data()[i] - 0.5);
        let bv = luma + 1.772 * (cb.data()[i] - 0.5);
        let gv = (luma - 0.299 * rv - 0.114 * bv) / 0.587;
        r.push(rv);
        g.push(gv);
        b.push(bv);
    }
    let (w, h) = y.dims();
    Ok([
        ImagePlane::new(w, h, r)?,
        ImagePlane::new(w, h, g)?,
        ImagePlane::new(w, h, b)?,
    ])
}

/// Output image plus the per-plane intermediates (the luma plane in
/// luma-only mode, otherwise one per channel).
#[derive(Debug, Clone)]
pub struct EnhanceReport {
    pub image: ColorImage,
    pub planes: Vec<PlaneResult>,
}

pub fn enhance_detailed(image: &ColorImage, cfg: &EnhanceConfig) -> Result<EnhanceReport> {
    match (image.channels(), cfg.color_mode) {
        (1, _) | (3, ColorMode::PerChannelRgb) => {
            let planes = image
                .planes()
                .iter()
                .map(|p| enhance_plane_detailed(p, cfg))
                .collect::<Result<Vec<_>>>()?;
            let out = ColorImage::new(planes.iter().map(|r| r.output.clone()).collect())?;
            Ok(EnhanceReport { image: out, planes })
        }
        (3, ColorMode::LumaOnly) => {
            let p = image.planes();
            let [luma, cb, cr] = rgb_to_ycbcr(&p[0], &p[1], &p[2])?;
            let result = enhance_plane_detailed(&luma, cfg)?;
            let [r, g, b] = ycbcr_to_rgb(&result.output, &cb, &cr)?;
            let out = ColorImage::rgb(r.clamped(), g.clamped(), b.clamped())?;
            Ok(EnhanceReport {
                image: out,
                planes: vec![result],
            })
        }
        (n, _) => Err(Error::UnsupportedChannels(n)),
    }
}

/// Enhances a gray or RGB image; output has the input's shape, in `[0, 1]`.
pub fn enhance(image: &ColorImage, cfg: &EnhanceConfig) -> Result<ColorImage> {
    Ok(enhance_detailed(image, cfg)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture(w: usize, h: usize) -> ImagePlane {
        ImagePlane::from_fn(w, h, |x, y| {
            (0.5 + 0.3 * ((x as f64) * 0.9).sin() * ((y as f64) * 0.7).cos()).clamp(0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn presets_resolve() {
        let s = resolve_preset("sharpen").unwrap();
        assert_eq!(s.curves[2].a, 20.0);
        assert_eq!(s.curves[2].width, 0.66);
        let d = resolve_preset("denoise-sharpen").unwrap();
        assert_eq!(d.curves[2].family, crate::tonemap::CurveFamily::InverseSCurve);
        assert!(matches!(
            resolve_preset("vivid"),
            Err(Error::UnknownPreset(_))
        ));
        for p in Preset::ALL {
            preset_config(p).validate().unwrap();
        }
    }

    #[test]
    fn identity_reconstructs() {
        let y = texture(12, 9);
        for norm in [NormMode::EXACT, NormMode::FAST] {
            let cfg = EnhanceConfig {
                norm,
                ..EnhanceConfig::default()
            };
            let z = enhance_plane(&y, &cfg).unwrap();
            assert!(z.max_abs_diff(&y) <= 1e-12);
        }
    }

    #[test]
    fn constant_gray_stays_constant() {
        let y = ImagePlane::filled(8, 8, 0.37).unwrap();
        for p in Preset::ALL {
            let z = enhance_plane(&y, &preset_config(p)).unwrap();
            let (lo, hi) = z.min_max();
            assert!(hi - lo <= 1e-12, "{}", p.name());
        }
    }

    #[test]
    fn closed_form_route_matches_streaming_layers() {
        let y = texture(10, 8);
        let mut cfg = preset_config(Preset::Sharpen);
        cfg.norm = NormMode::norm_free(AlphaStrategy::ClosedForm);
        let a = enhance_plane_detailed(&y, &cfg).unwrap();
        assert_eq!(a.alphas.len(), 2);
        assert!(a.alphas.iter().all(|&v| v > 0.0));
        assert!(a.layers.reconstruct().max_abs_diff(&y) <= 1e-12);
    }

    #[test]
    fn set_levels_resizes_curves() {
        let mut cfg = preset_config(Preset::Sharpen);
        cfg.set_levels(4).unwrap();
        assert_eq!(cfg.curves.len(), 5);
        assert_eq!(cfg.curves[1].a, 50.0);
        assert_eq!(cfg.curves[4].a, 20.0);
        assert_eq!(cfg.layer_name(2), "band2");
        cfg.validate().unwrap();
        cfg.set_levels(1).unwrap();
        assert_eq!(cfg.curves.len(), 2);
        assert_eq!(cfg.curves[1].a, 20.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = EnhanceConfig::default();
        cfg.curves.pop();
        assert!(cfg.validate().is_err());
        let cfg = EnhanceConfig {
            mask_source_level: 3,
            ..EnhanceConfig::default()
        };
        assert!(cfg.validate().is_err());
        let gray2 = ColorImage::new(vec![texture(3, 3), texture(3, 3)]).unwrap();
        assert_eq!(
            enhance(&gray2, &EnhanceConfig::default()).unwrap_err(),
            Error::UnsupportedChannels(2)
        );
    }

    #[test]
    fn ycbcr_round_trip() {
        let r = texture(4, 4);
        let g = r.map(|v| 1.0 - v);
        let b = r.map(|v| v * 0.5);
        let [y, cb, cr] = rgb_to_ycbcr(&r, &g, &b).unwrap();
        let [r2, g2, b2] = ycbcr_to_rgb(&y, &cb, &cr).unwrap();
        assert!(r.max_abs_diff(&r2) < 1e-12);
        assert!(g.max_abs_diff(&g2) < 1e-12);
        assert!(b.max_abs_diff(&b2) < 1e-12);
    }
}
