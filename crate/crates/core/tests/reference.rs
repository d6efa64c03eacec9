mod common;

use common::{max_diff, random_plane, rng};
use mlenhance::reference::{
    dense_assemble, diffusion_power, fixtures, frobenius_objective, frobenius_scan, verify_suite,
    AlphaGrid,
};
use mlenhance::{apply_exact, build_weight_field, field_stats, FilterMode, ImagePlane, KernelParams};

#[test]
fn constant_image_objective_vanishes_at_inverse_n() {
    let y = ImagePlane::filled(4, 2, 0.3).unwrap();
    let p = KernelParams::nlm(4, 1, 0.7);
    assert!(frobenius_objective(&y, &p, 1.0 / 8.0).unwrap() < 1e-28);
    let grid = AlphaGrid { lo: 0.0, hi: 0.25, steps: 1000 };
    let scan = frobenius_scan(&y, &p, grid).unwrap();
    assert!((scan.alpha_star - 0.125).abs() <= grid.step());
}

#[test]
fn objective_is_quadratic() {
    let y = random_plane(&mut rng(7), 4, 4);
    let p = KernelParams::nlm(2, 1, 0.7);
    let d_bar = field_stats(&build_weight_field(&y, &p).unwrap()).d_bar;
    let grid = AlphaGrid { lo: 0.0, hi: 2.0 / d_bar, steps: 10_000 };
    let scan = frobenius_scan(&y, &p, grid).unwrap();
    // vertex of the parabola through three well-separated grid points
    for (i0, i1, i2) in [(0, 5000, 10_000), (100, 2000, 7000), (3000, 3500, 9000)] {
        let (x0, x1, x2) = (scan.alphas[i0], scan.alphas[i1], scan.alphas[i2]);
        let (f0, f1, f2) = (scan.j_values[i0], scan.j_values[i1], scan.j_values[i2]);
        let num = (x1 - x0).powi(2) * (f1 - f2) - (x1 - x2).powi(2) * (f1 - f0);
        let den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
        let vertex = x1 - 0.5 * num / den;
        assert!((vertex - scan.alpha_star).abs() <= grid.step(), "{vertex} vs {}", scan.alpha_star);
    }
}

#[test]
fn diffusion_powers() {
    let mut r = rng(8);
    let y = random_plane(&mut r, 4, 4);
    let p = KernelParams::nlm(2, 1, 0.7);
    let w = build_weight_field(&y, &p).unwrap();
    let once = apply_exact(&w, &y).unwrap();
    assert!(diffusion_power(&y, &p, 1).unwrap().max_abs_diff(&once) <= 1e-12);
    let twice = apply_exact(&w, &once).unwrap();
    assert!(diffusion_power(&y, &p, 2).unwrap().max_abs_diff(&twice) <= 1e-10);
    assert!(diffusion_power(&y, &p, 0).is_err());
    let c = ImagePlane::filled(3, 3, 0.4).unwrap();
    assert!(diffusion_power(&c, &p, 6).unwrap().max_abs_diff(&c) <= 1e-12);
}

#[test]
fn dense_matrices() {
    let c = ImagePlane::filled(3, 3, 0.8).unwrap();
    let p = KernelParams::nlm(3, 0, 0.2);
    let exact = dense_assemble(&c, &p, FilterMode::Exact, 0.0).unwrap();
    assert!(exact.matrix.as_slice().iter().all(|&v| (v - 1.0 / 9.0).abs() < 1e-15));

    let y = random_plane(&mut rng(9), 5, 4);
    let p = KernelParams::nlm(2, 1, 0.7);
    let d_bar = field_stats(&build_weight_field(&y, &p).unwrap()).d_bar;
    let exact = dense_assemble(&y, &p, FilterMode::Exact, 0.0).unwrap();
    assert!(exact.matrix.as_slice().iter().all(|&v| v >= 0.0));
    assert!(exact.matrix.row_sums().iter().all(|s| (s - 1.0).abs() <= 1e-9));
    let mut saw_negative = false;
    for scale in [0.1, 1.0, 10.0] {
        let approx = dense_assemble(&y, &p, FilterMode::NormFree, scale / d_bar).unwrap();
        assert!(approx.matrix.row_sums().iter().all(|s| (s - 1.0).abs() <= 1e-9));
        assert!(approx.matrix.max_asymmetry() <= 1e-9);
        saw_negative |= approx.matrix.as_slice().iter().any(|&v| v < 0.0);
    }
    assert!(saw_negative, "large alpha drives the diagonal negative");
    let z = exact.apply(&y).unwrap();
    let fast = apply_exact(&build_weight_field(&y, &p).unwrap(), &y).unwrap();
    assert!(max_diff(z.data(), fast.data()) <= 1e-10);
}

#[test]
fn builtin_suite() {
    assert_eq!(fixtures().len(), 5);
    for fx in fixtures() {
        assert!(fx.image.height() == 1 || fx.image.dims() == (4, 4));
    }
    let checks = verify_suite();
    assert!(checks.len() > 50);
    for c in &checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}
