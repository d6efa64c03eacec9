//! Degree-based structure mask and the final layer blend.
//!
//! `m_i = 1 − d_i / p_i`, with `p_i` the clipped window size, is near zero
//! in flat regions (many similar neighbors) and grows on edges and texture.
//! Detail layers are multiplied by the mask; the base layer never is.

use crate::affinity::WeightField;
use crate::error::{invalid, Result};
use crate::plane::ImagePlane;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureMask {
    plane: ImagePlane,
}

impl StructureMask {
    pub fn from_degrees(
        width: usize,
        height: usize,
        degrees: &[f64],
        valid_counts: &[u32],
    ) -> Result<Self> {
        if degrees.len() != valid_counts.len() {
            return Err(invalid("degree and valid-count lengths differ"));
        }
        let values = degrees
            .iter()
            .zip(valid_counts)
            .map(|(&d, &p)| 1.0 - d / f64::from(p))
            .collect();
        Ok(Self {
            plane: ImagePlane::new(width, height, values)?,
        })
    }

    /// Uniform mask, mostly useful for tests and ablations.
    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        Ok(Self {
            plane: ImagePlane::filled(width, height, value)?,
        })
    }

    /// `m ↦ m^s`; `s = 1` is a no-op.
    pub fn with_gamma(self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid(format!("mask gamma must be > 0, got {s}")));
        }
        if s == 1.0 {
            return Ok(self);
        }
        Ok(Self {
            plane: self.plane.map(|m| m.powf(s)),
        })
    }

    pub fn values(&self) -> &[f64] {
        self.plane.data()
    }

    pub fn as_plane(&self) -> &ImagePlane {
        &self.plane
    }
}

/// Mask from one weight field's degrees and valid counts.
pub fn structure_mask(w: &WeightField) -> StructureMask {
    StructureMask::from_degrees(w.width(), w.height(), w.degrees(), w.valid_counts())
        .expect("weight field is internally consistent")
}

/// Sums the mapped layers, gating every detail layer by the mask when given.
/// No clamping.
pub fn blend_unclamped(
    base: &ImagePlane,
    mapped_bands: &[ImagePlane],
    mapped_high: &ImagePlane,
    mask: Option<&StructureMask>,
) -> Result<ImagePlane> {
    for layer in mapped_bands.iter().chain(std::iter::once(mapped_high)) {
        base.ensure_same_dims(layer)?;
    }
    if let Some(m) = mask {
        base.ensure_same_dims(m.as_plane())?;
    }
    let mut out = base.clone();
    for layer in mapped_bands.iter().chain(std::iter::once(mapped_high)) {
        match mask {
            Some(m) => {
                for ((o, &v), &g) in out.data_mut().iter_mut().zip(layer.data()).zip(m.values()) {
                    *o += g * v;
                }
            }
            None => {
                for (o, &v) in out.data_mut().iter_mut().zip(layer.data()) {
                    *o += v;
                }
            }
        }
    }
    Ok(out)
}

/// [`blend_unclamped`] followed by the single output clamp to `[0, 1]`.
pub fn blend(
    base: &ImagePlane,
    mapped_bands: &[ImagePlane],
    mapped_high: &ImagePlane,
    mask: Option<&StructureMask>,
) -> Result<ImagePlane> {
    Ok(blend_unclamped(base, mapped_bands, mapped_high, mask)?.clamped())
}
