mod common;

use common::{random_plane, rng};
use mlenhance::pipeline::{rgb_to_ycbcr, ycbcr_to_rgb};
use mlenhance::reference::dense_enhance;
use mlenhance::{
    enhance, enhance_detailed, enhance_plane, parse_config, preset_config, resolve_preset,
    to_config_string, ColorImage, ColorMode, CurveFamily, EnhanceConfig, Error, ImagePlane,
    NormMode, Preset,
};
use rand::Rng;

fn random_rgb(seed: u64, w: usize, h: usize) -> ColorImage {
    let mut r = rng(seed);
    ColorImage::rgb(
        random_plane(&mut r, w, h),
        random_plane(&mut r, w, h),
        random_plane(&mut r, w, h),
    )
    .unwrap()
}

#[test]
fn preset_constants() {
    let s = resolve_preset("sharpen").unwrap();
    assert_eq!((s.curves[2].a, s.curves[2].width), (20.0, 0.66));
    assert_eq!((s.curves[1].a, s.curves[1].width), (50.0, 0.33));
    assert_eq!((s.curves[0].a, s.curves[0].width), (6.0, 0.75));
    let d = resolve_preset("denoise_sharpen").unwrap();
    assert_eq!(d.curves[2].family, CurveFamily::InverseSCurve);
    assert_eq!((d.curves[2].a, d.curves[2].width), (10.0, 1.0));
    let sm = resolve_preset("smooth").unwrap();
    assert_eq!(sm.curves[2].family, CurveFamily::LinearGain(0.0));
    assert_eq!((sm.curves[1].a, sm.curves[1].width), (10.0, 0.2));
    assert!(!sm.mask_enabled && s.mask_enabled && d.mask_enabled);
    for p in Preset::ALL {
        let c = preset_config(p);
        assert_eq!(c.kernel.h_y, 0.7);
        assert_eq!((c.kernel.window_size(), c.kernel.patch_radius), (25, 1));
        assert!(!c.kernel.spatial_term);
        assert_eq!(c.levels, 2);
        assert_eq!(parse_config(&to_config_string(&c)).unwrap(), c);
    }
    assert!(matches!(resolve_preset("nope"), Err(Error::UnknownPreset(_))));
}

#[test]
fn luma_mode_passes_chroma_through() {
    let img = random_rgb(1, 13, 11);
    for p in Preset::ALL {
        let cfg = preset_config(p);
        let report = enhance_detailed(&img, &cfg).unwrap();
        let planes = img.planes();
        let [_, cb, cr] = rgb_to_ycbcr(&planes[0], &planes[1], &planes[2]).unwrap();
        let [r, g, b] = ycbcr_to_rgb(&report.planes[0].output, &cb, &cr).unwrap();
        let expected = ColorImage::rgb(r.clamped(), g.clamped(), b.clamped()).unwrap();
        assert_eq!(report.image, expected);
    }
}

#[test]
fn per_channel_mode_is_independent() {
    let img = random_rgb(2, 9, 8);
    let mut cfg = preset_config(Preset::Sharpen);
    cfg.color_mode = ColorMode::PerChannelRgb;
    let out = enhance(&img, &cfg).unwrap();
    for (c, plane) in img.planes().iter().enumerate() {
        assert_eq!(out.planes()[c], enhance_plane(plane, &cfg).unwrap());
    }
}

#[test]
fn deterministic_across_threads() {
    let img = random_rgb(3, 40, 33);
    for p in [Preset::Sharpen, Preset::DenoiseSharpen] {
        let cfg = preset_config(p);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(5).build().unwrap();
        let a = one.install(|| enhance(&img, &cfg).unwrap());
        let b = many.install(|| enhance(&img, &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, enhance(&img, &cfg).unwrap());
    }
}

#[test]
fn outputs_in_unit_range() {
    let img = random_rgb(4, 20, 17);
    for p in Preset::ALL {
        for norm in [NormMode::EXACT, NormMode::FAST] {
            let mut cfg = preset_config(p);
            cfg.norm = norm;
            let out = enhance(&img, &cfg).unwrap();
            for plane in out.planes() {
                assert!(plane.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
    }
}

#[test]
fn identity_round_trips_8bit() {
    let mut r = rng(5);
    let (w, h) = (17, 12);
    for channels in [1, 3] {
        let samples: Vec<u8> = (0..w * h * channels).map(|_| r.random()).collect();
        let img = ColorImage::from_interleaved_u8(w, h, channels, &samples).unwrap();
        for color in [ColorMode::LumaOnly, ColorMode::PerChannelRgb] {
            for norm in [NormMode::EXACT, NormMode::FAST] {
                let cfg = EnhanceConfig {
                    color_mode: color,
                    norm,
                    ..EnhanceConfig::default()
                };
                let out = enhance(&img, &cfg).unwrap();
                assert_eq!(out.to_interleaved_u8(), samples);
            }
        }
    }
}

#[test]
fn constant_images_stay_constant() {
    let gray = ColorImage::gray(ImagePlane::filled(9, 9, 0.6).unwrap());
    let rgb = ColorImage::rgb(
        ImagePlane::filled(5, 4, 0.2).unwrap(),
        ImagePlane::filled(5, 4, 0.5).unwrap(),
        ImagePlane::filled(5, 4, 0.9).unwrap(),
    )
    .unwrap();
    for p in Preset::ALL {
        for img in [&gray, &rgb] {
            let out = enhance(img, &preset_config(p)).unwrap();
            for plane in out.planes() {
                let (lo, hi) = plane.min_max();
                assert!(hi - lo <= 1e-12);
            }
        }
    }
}

#[test]
fn step_row_matches_dense_chain() {
    let y = ImagePlane::new(4, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
    for p in [Preset::Sharpen, Preset::DenoiseSharpen, Preset::Smooth] {
        let mut cfg = preset_config(p);
        cfg.norm = NormMode::EXACT;
        let fast = enhance_plane(&y, &cfg).unwrap();
        let dense = dense_enhance(&y, &cfg).unwrap();
        assert!(fast.max_abs_diff(&dense.output) <= 1e-6, "{}", p.name());
    }
}

#[test]
fn norm_free_chain_matches_dense_chain() {
    let y = random_plane(&mut rng(6), 6, 5);
    for alpha in ["invmean", "trace", "closed", "0.05"] {
        let mut cfg = preset_config(Preset::Sharpen);
        cfg.norm = NormMode::norm_free(alpha.parse().unwrap());
        let fast = enhance_plane(&y, &cfg).unwrap();
        let dense = dense_enhance(&y, &cfg).unwrap();
        assert!(fast.max_abs_diff(&dense.output) <= 1e-6, "{alpha}");
    }
}

#[test]
fn unsupported_channels() {
    let img = ColorImage::new(vec![ImagePlane::filled(2, 2, 0.1).unwrap(); 4]).unwrap();
    assert_eq!(
        enhance(&img, &EnhanceConfig::default()).unwrap_err(),
        Error::UnsupportedChannels(4)
    );
}
