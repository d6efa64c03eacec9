//! Single-channel and multi-channel float images.
//!
//! Samples are stored row-major as `f64`. Nominal range is `[0, 1]`, but
//! detail layers and normalization-free filter outputs are signed and may
//! leave that range, so nothing here clamps implicitly.

use crate::error::{Error, Result};

/// Single-channel scalar image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self::new(width, height, data)
    }

    /// Converts 8-bit samples via `v / 255`.
    pub fn from_u8(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            samples.iter().map(|&v| f64::from(v) / 255.0).collect(),
        )
    }

    /// Quantizes via `round(clamp(v) * 255)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_u8(v)).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two planes of equal size.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        self.ensure_dims(other.width, other.height)
    }

    pub fn ensure_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (self.width, self.height),
            });
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteInput)
        }
    }

    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Largest absolute per-pixel difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims(), "plane dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Image with one (gray) or three (RGB) planes of identical size.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    planes: Vec<ImagePlane>,
}

impl ColorImage {
    pub fn new(planes: Vec<ImagePlane>) -> Result<Self> {
        let first = planes.first().ok_or(Error::EmptyImage)?;
        for p in &planes[1..] {
            first.ensure_same_dims(p)?;
        }
        Ok(Self { planes })
    }

    pub fn gray(plane: ImagePlane) -> Self {
        Self {
            planes: vec![plane],
        }
    }

    pub fn rgb(r: ImagePlane, g: ImagePlane, b: ImagePlane) -> Result<Self> {
        Self::new(vec![r, g, b])
    }

    /// Builds planes from interleaved 8-bit samples.
    pub fn from_interleaved_u8(
        width: usize,
        height: usize,
        channels: usize,
        samples: &[u8],
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::UnsupportedChannels(0));
        }
        if samples.len() != width * height * channels {
            return Err(Error::DimensionMismatch {
                expected: (width * channels, height),
                found: (samples.len(), 1),
            });
        }
        let planes = (0..channels)
            .map(|c| {
                let data = samples
                    .iter()
                    .skip(c)
                    .step_by(channels)
                    .map(|&v| f64::from(v) / 255.0)
                    .collect();
                ImagePlane::new(width, height, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(planes)
    }

    pub fn to_interleaved_u8(&self) -> Vec<u8> {
        let channels = self.planes.len();
        let mut out = vec![0u8; self.width() * self.height() * channels];
        for (c, plane) in self.planes.iter().enumerate() {
            for (i, &v) in plane.data().iter().enumerate() {
                out[i * channels + c] = quantize_u8(v);
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[ImagePlane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<ImagePlane> {
        self.planes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_mismatched() {
        assert_eq!(ImagePlane::new(0, 3, vec![]), Err(Error::EmptyImage));
        assert!(matches!(
            ImagePlane::new(2, 2, vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn u8_round_trip_is_exact() {
        let samples: Vec<u8> = (0..=255).collect();
        let plane = ImagePlane::from_u8(16, 16, &samples).unwrap();
        assert_eq!(plane.to_u8(), samples);
    }

    #[test]
    fn interleaved_round_trip() {
        let samples: Vec<u8> = (0..24).map(|v| (v * 10) as u8).collect();
        let img = ColorImage::from_interleaved_u8(4, 2, 3, &samples).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.planes()[1].get(0, 0), 10.0 / 255.0);
        assert_eq!(img.to_interleaved_u8(), samples);
    }

    #[test]
    fn quantize_clamps() {
        assert_eq!(quantize_u8(-0.3), 0);
        assert_eq!(quantize_u8(1.7), 255);
        assert_eq!(quantize_u8(0.5), 128);
    }
}
