mod common;

use common::{max_diff, random_plane, rng};
use mlenhance::reference::{dense_kernel, dense_valid_counts};
use mlenhance::{
    apply_exact, blend, blend_unclamped, build_cascade, build_weight_field, decompose,
    structure_mask, ImagePlane, KernelParams, NormMode, StructureMask,
};
use proptest::prelude::*;

#[test]
fn mask_matches_recomputed_degrees() {
    let y = random_plane(&mut rng(14), 8, 8);
    let params = KernelParams::nlm(2, 1, 0.7);
    let m = structure_mask(&build_weight_field(&y, &params).unwrap());
    let (_, d) = dense_kernel(&y, &params).unwrap();
    let p = dense_valid_counts(&y, 2);
    let oracle: Vec<f64> = d.iter().zip(&p).map(|(d, &p)| 1.0 - d / p as f64).collect();
    assert!(max_diff(m.values(), &oracle) <= 1e-9);
}

#[test]
fn isolated_pixel_limit() {
    let y = random_plane(&mut rng(15), 5, 3);
    let w = build_weight_field(&y, &KernelParams::nlm(1, 1, 0.7)).unwrap();
    let iso = w.map_weights(|i, j, k| if i == j { k } else { 0.0 });
    let m = structure_mask(&iso);
    for (i, &v) in m.values().iter().enumerate() {
        assert_eq!(v, 1.0 - 1.0 / f64::from(w.valid_counts()[i]));
    }
}

#[test]
fn identity_curve_blends() {
    let y = random_plane(&mut rng(16), 9, 7);
    let c = build_cascade(&y, &KernelParams::nlm(2, 1, 0.7), 2, NormMode::EXACT).unwrap();
    let l = decompose(&y, &c).unwrap();
    let none = blend_unclamped(&l.base, &l.bands, &l.high, None).unwrap();
    assert!(none.max_abs_diff(&y) <= 1e-6);
    let ones = StructureMask::uniform(9, 7, 1.0).unwrap();
    assert!(blend_unclamped(&l.base, &l.bands, &l.high, Some(&ones)).unwrap().max_abs_diff(&y) <= 1e-6);
    let zeros = StructureMask::uniform(9, 7, 0.0).unwrap();
    let smooth = blend_unclamped(&l.base, &l.bands, &l.high, Some(&zeros)).unwrap();
    assert!(smooth.max_abs_diff(&apply_exact(&c.levels()[0], &y).unwrap()) <= 1e-9);
}

#[test]
fn blend_is_linear_in_each_layer() {
    let mut r = rng(18);
    let base = random_plane(&mut r, 6, 6);
    let band = random_plane(&mut r, 6, 6).map(|v| v - 0.5);
    let high = random_plane(&mut r, 6, 6).map(|v| 0.2 * (v - 0.5));
    let mask = StructureMask::from_degrees(6, 6, &random_plane(&mut r, 6, 6).map(|v| 1.0 + 8.0 * v).into_data(), &[9; 36]).unwrap();
    let one = blend_unclamped(&base, std::slice::from_ref(&band), &high, Some(&mask)).unwrap();
    let doubled = band.map(|v| 2.0 * v);
    let two = blend_unclamped(&base, std::slice::from_ref(&doubled), &high, Some(&mask)).unwrap();
    let without = blend_unclamped(&base, &[band.map(|_| 0.0)], &high, Some(&mask)).unwrap();
    for i in 0..36 {
        let contrib = one.data()[i] - without.data()[i];
        let contrib2 = two.data()[i] - without.data()[i];
        assert!((contrib2 - 2.0 * contrib).abs() <= 1e-15);
    }
}

#[test]
fn masked_output_between_unmasked_and_base() {
    let y = random_plane(&mut rng(19), 10, 10);
    let c = build_cascade(&y, &KernelParams::nlm(2, 1, 0.7), 2, NormMode::FAST).unwrap();
    let l = decompose(&y, &c).unwrap();
    let m = structure_mask(&c.levels()[0]);
    // gains ≥ 0 keep the sign of every detail layer
    let bands: Vec<ImagePlane> = l.bands.iter().map(|b| b.map(|v| 1.7 * v)).collect();
    let high = l.high.map(|v| 0.4 * v);
    let masked = blend_unclamped(&l.base, &bands, &high, Some(&m)).unwrap();
    let open = blend_unclamped(&l.base, &bands, &high, None).unwrap();
    for i in 0..y.len() {
        let (lo, hi) = {
            let (a, b) = (open.data()[i], l.base.data()[i]);
            (a.min(b), a.max(b))
        };
        // only holds when the detail terms share a sign; check that case
        let terms: Vec<f64> = bands.iter().map(|b| b.data()[i]).chain([high.data()[i]]).collect();
        if terms.iter().all(|&t| t >= 0.0) || terms.iter().all(|&t| t <= 0.0) {
            assert!(masked.data()[i] >= lo - 1e-15 && masked.data()[i] <= hi + 1e-15);
        }
    }
}

#[test]
fn blend_checks_dimensions_and_clamps() {
    let a = ImagePlane::filled(3, 3, 0.9).unwrap();
    let b = ImagePlane::filled(3, 2, 0.5).unwrap();
    assert!(blend(&a, &[], &b, None).is_err());
    let up = ImagePlane::filled(3, 3, 0.5).unwrap();
    let out = blend(&a, &[], &up, None).unwrap();
    assert!(out.data().iter().all(|&v| v == 1.0));
    assert!(StructureMask::uniform(3, 3, 0.5).unwrap().with_gamma(0.0).is_err());
    let sq = StructureMask::uniform(3, 3, 0.5).unwrap().with_gamma(2.0).unwrap();
    assert!(sq.values().iter().all(|&v| v == 0.25));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mask_in_unit_interval(
        (w_, h_, data) in (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), proptest::collection::vec(0.0f64..=1.0, w * h))
        }),
        r in 1usize..4,
        h in 0.01f64..2.0,
    ) {
        let y = ImagePlane::new(w_, h_, data).unwrap();
        let m = structure_mask(&build_weight_field(&y, &KernelParams::nlm(r, 1, h)).unwrap());
        prop_assert!(m.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let c = ImagePlane::filled(w_, h_, y.data()[0]).unwrap();
        let mc = structure_mask(&build_weight_field(&c, &KernelParams::nlm(r, 1, h)).unwrap());
        prop_assert!(mc.values().iter().all(|&v| v == 0.0));
    }
}
