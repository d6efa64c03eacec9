//! Image files ↔ planes. PNG and binary PPM/PGM, 8-bit.

use std::path::Path;

use anyhow::{Context, Result};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::plane::{ColorImage, ImagePlane};

/// Reads an image as gray or RGB in `[0, 1]`. Alpha is dropped and deeper
/// samples are reduced to 8 bits.
pub fn read_image(path: &Path) -> Result<ColorImage> {
    let img = image::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let image = match img {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => {
            ColorImage::from_interleaved_u8(w, h, 1, img.to_luma8().as_raw())?
        }
        other => ColorImage::from_interleaved_u8(w, h, 3, other.to_rgb8().as_raw())?,
    };
    Ok(image)
}

pub fn write_image(path: &Path, image: &ColorImage) -> Result<()> {
    let color = match image.channels() {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        n => anyhow::bail!("cannot write {n}-channel image"),
    };
    let (w, h) = (image.width() as u32, image.height() as u32);
    let bytes = image.to_interleaved_u8();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let result = match ext.as_deref() {
        Some("ppm" | "pgm" | "pnm") => {
            let subtype = if color == ExtendedColorType::L8 {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            std::fs::File::create(path)
                .map_err(image::ImageError::IoError)
                .and_then(|f| {
                    PnmEncoder::new(std::io::BufWriter::new(f))
                        .with_subtype(subtype)
                        .write_image(&bytes, w, h, color)
                })
        }
        _ => image::save_buffer(path, &bytes, w, h, color),
    };
    result.with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_plane(path: &Path, plane: &ImagePlane) -> Result<()> {
    write_image(path, &ColorImage::gray(plane.clone()))
}
