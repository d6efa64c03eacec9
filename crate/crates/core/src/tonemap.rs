//! Point-wise mapping curves for the decomposition layers.
//!
//! Sigmoid-derived curves are realized as lookup tables sampled over their
//! active interval. On the signed detail domain the s-curve is
//!
//! ```text
//! S(t) = w · tanh(a·t / 2w) / tanh(a / 2)    for |t| < w
//! S(t) = t                                   otherwise
//! ```
//!
//! (`tanh(u/2) = 2σ(u) − 1`). It is odd, passes through `±w` and joins the
//! identity continuously. The base-layer variant is the same curve recentred
//! at 0.5 with active interval `[0.5 − w/2, 0.5 + w/2]`. The inverse s-curve
//! inverts the forward table by binary search at evaluation time, so
//! `inverse(S(t)) = t` up to rounding.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::plane::ImagePlane;

/// Samples per lookup table.
pub const LUT_SIZE: usize = 4096;

pub const DEFAULT_GAMMA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFamily {
    Identity,
    /// `T(t) = β·t` over the whole real line.
    LinearGain(f64),
    SCurve,
    InverseSCurve,
    /// `t ↦ t^γ` followed by the base-domain s-curve.
    GammaSCurve,
}

impl CurveFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CurveFamily::Identity => "identity",
            CurveFamily::LinearGain(_) => "linear_gain",
            CurveFamily::SCurve => "s_curve",
            CurveFamily::InverseSCurve => "inverse_s_curve",
            CurveFamily::GammaSCurve => "gamma_s_curve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveDomain {
    /// Signed detail values, nominally `[−1, 1]`.
    SignedDetail,
    /// Intensities in `[0, 1]`.
    Base,
}

impl fmt::Display for CurveDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveDomain::SignedDetail => "signed",
            CurveDomain::Base => "base",
        })
    }
}

impl FromStr for CurveDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" | "signed_detail" => Ok(CurveDomain::SignedDetail),
            "base" => Ok(CurveDomain::Base),
            other => Err(invalid(format!("unknown curve domain '{other}'"))),
        }
    }
}

/// Parameters of one layer's mapping curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub family: CurveFamily,
    /// Strength.
    pub a: f64,
    /// Active range `w ∈ (0, 1]`.
    pub width: f64,
    /// Exponent for `GammaSCurve`.
    pub gamma: f64,
    pub domain: CurveDomain,
}

impl CurveSpec {
    pub fn identity(domain: CurveDomain) -> Self {
        Self {
            family: CurveFamily::Identity,
            a: 1.0,
            width: 1.0,
            gamma: DEFAULT_GAMMA,
            domain,
        }
    }

    pub fn linear_gain(beta: f64, domain: CurveDomain) -> Self {
        Self {
            family: CurveFamily::LinearGain(beta),
            ..Self::identity(domain)
        }
    }

    pub fn s_curve(a: f64, width: f64, domain: CurveDomain) -> Self {
        Self {
            family: CurveFamily::SCurve,
            a,
            width,
            ..Self::identity(domain)
        }
    }

    pub fn inverse_s_curve(a: f64, width: f64, domain: CurveDomain) -> Self {
        Self {
            family: CurveFamily::InverseSCurve,
            ..Self::s_curve(a, width, domain)
        }
    }

    pub fn gamma_s_curve(a: f64, width: f64, gamma: f64) -> Self {
        Self {
            family: CurveFamily::GammaSCurve,
            gamma,
            ..Self::s_curve(a, width, CurveDomain::Base)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            CurveFamily::Identity => Ok(()),
            CurveFamily::LinearGain(beta) => {
                if beta.is_finite() && beta >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("linear gain must be finite and >= 0, got {beta}")))
                }
            }
            CurveFamily::SCurve | CurveFamily::InverseSCurve | CurveFamily::GammaSCurve => {
                if !(self.a > 0.0 && self.a.is_finite()) {
                    return Err(invalid(format!("curve strength a must be > 0, got {}", self.a)));
                }
                if !(self.width > 0.0 && self.width <= 1.0) {
                    return Err(invalid(format!(
                        "curve width must be in (0, 1], got {}",
                        self.width
                    )));
                }
                if self.family == CurveFamily::GammaSCurve {
                    if self.domain != CurveDomain::Base {
                        return Err(invalid("gamma_s_curve is only defined on the base domain"));
                    }
                    if !(self.gamma > 0.0 && self.gamma.is_finite()) {
                        return Err(invalid(format!("gamma must be > 0, got {}", self.gamma)));
                    }
                }
                Ok(())
            }
        }
    }

    /// Interval where the curve departs from the identity.
    fn active_interval(&self) -> (f64, f64) {
        match self.domain {
            CurveDomain::SignedDetail => (-self.width, self.width),
            CurveDomain::Base => (0.5 - self.width / 2.0, 0.5 + self.width / 2.0),
        }
    }
}

/// Closed-form forward s-curve for `spec.domain`.
pub(crate) fn s_curve_value(a: f64, width: f64, domain: CurveDomain, t: f64) -> f64 {
    let (center, half) = match domain {
        CurveDomain::SignedDetail => (0.0, width),
        CurveDomain::Base => (0.5, width / 2.0),
    };
    let u = t - center;
    if u.abs() >= half {
        return t;
    }
    center + half * (a * u / (2.0 * half)).tanh() / (a / 2.0).tanh()
}

/// Piecewise-linear table over `[lo, hi]`. With `center = Some(c)` the
/// table holds `g(u) = S(c + u) − c` for `u ∈ [0, hi]` and the curve is
/// evaluated as `c ± g(|t − c|)`, which keeps the odd symmetry and `S(c) = c`
/// exact.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    lo: f64,
    hi: f64,
    lut: Vec<f64>,
    center: Option<f64>,
    inverse: bool,
}

impl Table {
    fn sample(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Self {
        let step = (hi - lo) / (LUT_SIZE - 1) as f64;
        let mut lut: Vec<f64> = (0..LUT_SIZE).map(|i| f(lo + i as f64 * step)).collect();
        lut[LUT_SIZE - 1] = f(hi);
        Self {
            lo,
            hi,
            lut,
            center: None,
            inverse: false,
        }
    }

    fn symmetric(center: f64, half: f64, f: impl Fn(f64) -> f64) -> Self {
        Self {
            center: Some(center),
            ..Self::sample(0.0, half, |u| f(center + u) - center)
        }
    }

    #[inline]
    fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * (self.hi - self.lo) / (LUT_SIZE - 1) as f64
    }

    #[inline]
    fn forward(&self, t: f64) -> f64 {
        let pos = (t - self.lo) / (self.hi - self.lo) * (LUT_SIZE - 1) as f64;
        let i = (pos as usize).min(LUT_SIZE - 2);
        let frac = pos - i as f64;
        self.lut[i] + frac * (self.lut[i + 1] - self.lut[i])
    }

    #[inline]
    fn backward(&self, v: f64) -> f64 {
        let i = self
            .lut
            .partition_point(|&s| s <= v)
            .saturating_sub(1)
            .min(LUT_SIZE - 2);
        let (s0, s1) = (self.lut[i], self.lut[i + 1]);
        let x0 = self.node(i);
        if s1 > s0 {
            let frac = ((v - s0) / (s1 - s0)).clamp(0.0, 1.0);
            x0 + frac * (self.node(i + 1) - x0)
        } else {
            x0
        }
    }

    #[inline]
    fn lookup(&self, t: f64) -> f64 {
        if self.inverse {
            self.backward(t)
        } else {
            self.forward(t)
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        match self.center {
            Some(c) => {
                let u = t - c;
                let mag = u.abs();
                if mag >= self.hi || mag.is_nan() {
                    return t;
                }
                c + self.lookup(mag).copysign(u)
            }
            None => {
                if !(t > self.lo && t < self.hi) {
                    return t;
                }
                self.lookup(t)
            }
        }
    }

    fn input_range(&self) -> (f64, f64) {
        match self.center {
            Some(c) => (c - self.hi, c + self.hi),
            None => (self.lo, self.hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CurveKind {
    Identity,
    Linear(f64),
    Table(Table),
}

/// A realized mapping curve. Immutable and cheap to share.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneCurve {
    spec: CurveSpec,
    kind: CurveKind,
}

impl ToneCurve {
    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Identity => t,
            CurveKind::Linear(beta) => beta * t,
            CurveKind::Table(table) => table.eval(t),
        }
    }

    /// Forward samples (for the inverse s-curve, the table being inverted).
    /// Symmetric curves store one half, offsets from the center.
    pub fn lut(&self) -> Option<&[f64]> {
        match &self.kind {
            CurveKind::Table(t) => Some(&t.lut),
            _ => None,
        }
    }

    /// Interval covered by the table; identity outside it.
    pub fn table_range(&self) -> Option<(f64, f64)> {
        match &self.kind {
            CurveKind::Table(t) => Some(t.input_range()),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CurveKind::Identity)
    }
}

pub fn make_curve(spec: &CurveSpec) -> Result<ToneCurve> {
    spec.validate()?;
    let kind = match spec.family {
        CurveFamily::Identity => CurveKind::Identity,
        CurveFamily::LinearGain(beta) => CurveKind::Linear(beta),
        CurveFamily::SCurve | CurveFamily::InverseSCurve => {
            let (lo, hi) = spec.active_interval();
            let (a, width, domain) = (spec.a, spec.width, spec.domain);
            let center = (lo + hi) / 2.0;
            let mut table = Table::symmetric(center, hi - center, |t| s_curve_value(a, width, domain, t));
            table.inverse = spec.family == CurveFamily::InverseSCurve;
            CurveKind::Table(table)
        }
        CurveFamily::GammaSCurve => {
            let (a, width, gamma) = (spec.a, spec.width, spec.gamma);
            CurveKind::Table(Table::sample(0.0, 1.0, |t| {
                s_curve_value(a, width, CurveDomain::Base, t.powf(gamma))
            }))
        }
    };
    Ok(ToneCurve { spec: *spec, kind })
}

pub fn apply_curve(c: &ToneCurve, p: &ImagePlane) -> ImagePlane {
    if c.is_identity() {
        return p.clone();
    }
    p.map(|v| c.eval(v))
}
