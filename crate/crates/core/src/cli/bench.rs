//! Running-time grid over kernel window sizes and image sizes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pipeline::{enhance, EnhanceConfig};
use crate::plane::{ColorImage, ImagePlane};

pub const DEFAULT_WINDOWS: [usize; 4] = [3, 5, 7, 9];
pub const DEFAULT_SIZES_MP: [f64; 4] = [0.4, 1.0, 3.0, 12.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    /// Window side length.
    pub window: usize,
    pub size_mp: f64,
    /// Mean seconds per enhance call.
    pub seconds: f64,
    pub mp_per_s: f64,
}

/// Uniform-noise gray image of about `mp` megapixels with a 4:3 aspect.
pub fn synthetic_plane(mp: f64, seed: u64) -> Result<ImagePlane> {
    let pixels = (mp * 1e6).max(1.0);
    let width = ((pixels * 4.0 / 3.0).sqrt().round() as usize).max(1);
    let height = ((pixels / width as f64).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height).map(|_| rng.random::<f64>()).collect();
    ImagePlane::new(width, height, data)
}

/// Times `enhance` (no I/O) for every window side × image size.
pub fn run_grid(
    cfg: &EnhanceConfig,
    windows: &[usize],
    sizes_mp: &[f64],
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &size in sizes_mp {
        let image = ColorImage::gray(synthetic_plane(size, 7)?);
        let mp = image.width() as f64 * image.height() as f64 / 1e6;
        for &window in windows {
            let mut c = cfg.clone();
            c.kernel.window_radius = window / 2;
            c.validate()?;
            let mut total = 0.0;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                let out = enhance(&image, &c)?;
                total += start.elapsed().as_secs_f64();
                std::hint::black_box(out);
            }
            let seconds = total / repeats.max(1) as f64;
            rows.push(BenchRow {
                window,
                size_mp: mp,
                seconds,
                mp_per_s: mp / seconds,
            });
        }
    }
    Ok(rows)
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = String::from("window size_mp seconds mp_per_s\n");
    for r in rows {
        s.push_str(&format!(
            "{}x{} {:.3} {:.4} {:.3}\n",
            r.window, r.window, r.size_mp, r.seconds, r.mp_per_s
        ));
    }
    s
}
