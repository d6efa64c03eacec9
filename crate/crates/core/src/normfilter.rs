//! Exact row-normalized filtering (`W = D⁻¹K`) and the normalization-free
//! approximation `Ŵ = I + α(K − D)`, plus estimators for `α`.
//!
//! Both filters are applied straight from the windowed weights; no `n×n`
//! matrix is ever formed. The closed-form `α` likewise uses windowed traces.

use std::fmt;
use std::str::FromStr;

use crate::affinity::{degree_stats, field_stats, WeightField};
use crate::error::{invalid, Error, Result};
use crate::plane::ImagePlane;

/// Denominators at or below this are treated as `K = D`.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    Exact,
    NormFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaStrategy {
    ClosedForm,
    TraceRatio,
    InverseMeanDegree,
    Fixed(f64),
}

impl AlphaStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlphaStrategy::Fixed(v) if !(v > 0.0 && v.is_finite()) => {
                Err(invalid(format!("fixed alpha must be > 0, got {v}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AlphaStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaStrategy::ClosedForm => f.write_str("closed"),
            AlphaStrategy::TraceRatio => f.write_str("trace"),
            AlphaStrategy::InverseMeanDegree => f.write_str("invmean"),
            AlphaStrategy::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for AlphaStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let strategy = match s {
            "closed" | "closed_form" => AlphaStrategy::ClosedForm,
            "trace" | "trace_ratio" => AlphaStrategy::TraceRatio,
            "invmean" | "inverse_mean_degree" => AlphaStrategy::InverseMeanDegree,
            other => AlphaStrategy::Fixed(
                other
                    .parse()
                    .map_err(|_| invalid(format!("unknown alpha strategy '{other}'")))?,
            ),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// How each level of the filter bank is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormMode {
    pub mode: FilterMode,
    pub alpha: AlphaStrategy,
}

impl NormMode {
    pub const EXACT: NormMode = NormMode {
        mode: FilterMode::Exact,
        alpha: AlphaStrategy::InverseMeanDegree,
    };

    pub const FAST: NormMode = NormMode {
        mode: FilterMode::NormFree,
        alpha: AlphaStrategy::InverseMeanDegree,
    };

    pub fn norm_free(alpha: AlphaStrategy) -> Self {
        Self {
            mode: FilterMode::NormFree,
            alpha,
        }
    }
}

impl Default for NormMode {
    fn default() -> Self {
        NormMode::FAST
    }
}

/// `Σ_j k_ij y_j` for every pixel.
pub(crate) fn weighted_sums(w: &WeightField, y: &ImagePlane) -> Vec<f64> {
    use rayon::prelude::*;
    let data = y.data();
    (0..w.pixels())
        .into_par_iter()
        .map(|i| {
            let row = w.row(i);
            let mut acc = 0.0;
            for (slot, &k) in row.iter().enumerate() {
                if let Some(j) = w.neighbor(i, slot) {
                    acc += k * data[j];
                }
            }
            acc
        })
        .collect()
}

pub(crate) fn exact_from_sums(y: &ImagePlane, sums: &[f64], degrees: &[f64]) -> ImagePlane {
    let data = sums.iter().zip(degrees).map(|(s, d)| s / d).collect();
    ImagePlane::new(y.width(), y.height(), data).expect("dimensions checked by caller")
}

pub(crate) fn norm_free_from_sums(
    y: &ImagePlane,
    sums: &[f64],
    degrees: &[f64],
    alpha: f64,
) -> ImagePlane {
    let data = y
        .data()
        .iter()
        .zip(sums.iter().zip(degrees))
        .map(|(&yi, (&s, &d))| yi + alpha * (s - d * yi))
        .collect();
    ImagePlane::new(y.width(), y.height(), data).expect("dimensions checked by caller")
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("alpha must be > 0, got {alpha}")))
    }
}

/// `z_i = Σ_j k_ij y_j / d_i`.
pub fn apply_exact(w: &WeightField, y: &ImagePlane) -> Result<ImagePlane> {
    w.ensure_matches(y)?;
    Ok(exact_from_sums(y, &weighted_sums(w, y), w.degrees()))
}

/// `ẑ_i = y_i + α(Σ_j k_ij y_j − d_i y_i)`. Not clamped.
pub fn apply_norm_free(w: &WeightField, y: &ImagePlane, alpha: f64) -> Result<ImagePlane> {
    w.ensure_matches(y)?;
    check_alpha(alpha)?;
    Ok(norm_free_from_sums(
        y,
        &weighted_sums(w, y),
        w.degrees(),
        alpha,
    ))
}

/// Traces entering the least-squares `α`, computed from windowed weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceTerms {
    /// `tr(K D⁻¹ K)`
    pub k_dinv_k: f64,
    /// `tr(K)`
    pub k: f64,
    /// `tr(D)`
    pub d: f64,
    /// `tr(K²)`
    pub k_squared: f64,
    /// `tr(K D)`
    pub kd: f64,
    /// `tr(D²)`
    pub d_squared: f64,
}

impl TraceTerms {
    pub fn numerator(&self) -> f64 {
        self.k_dinv_k - 2.0 * self.k + self.d
    }

    pub fn denominator(&self) -> f64 {
        self.k_squared - 2.0 * self.kd + self.d_squared
    }
}

pub fn trace_terms(w: &WeightField) -> TraceTerms {
    let m = w.window_size();
    let center = w.center_slot();
    let degrees = w.degrees();
    let mut t = TraceTerms {
        k_dinv_k: 0.0,
        k: 0.0,
        d: 0.0,
        k_squared: 0.0,
        kd: 0.0,
        d_squared: 0.0,
    };
    for i in 0..w.pixels() {
        let row = w.row(i);
        let d_i = degrees[i];
        let k_ii = row[center];
        t.k += k_ii;
        t.d += d_i;
        t.kd += k_ii * d_i;
        t.d_squared += d_i * d_i;
        for (slot, &k_ij) in row.iter().enumerate() {
            let Some(j) = w.neighbor(i, slot) else {
                continue;
            };
            // the slot of j that points back at i mirrors this one
            let k_ji = w.weights()[j * m + (m - 1 - slot)];
            t.k_squared += k_ij * k_ji;
            t.k_dinv_k += k_ij * k_ji / degrees[j];
        }
    }
    t
}

/// An `α` value and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub value: f64,
    pub strategy: AlphaStrategy,
    /// Set when the closed form was degenerate and `1/d̄` was substituted.
    pub degenerate: bool,
}

pub fn estimate_alpha(w: &WeightField, strategy: AlphaStrategy) -> Result<AlphaEstimate> {
    strategy.validate()?;
    if strategy != AlphaStrategy::ClosedForm {
        return Ok(alpha_from_degrees(w.degrees(), w.window_size(), strategy));
    }
    let terms = trace_terms(w);
    let den = terms.denominator();
    if den <= DEGENERATE_DENOMINATOR {
        let stats = field_stats(w);
        return Ok(AlphaEstimate {
            value: 1.0 / stats.d_bar,
            strategy,
            degenerate: true,
        });
    }
    Ok(AlphaEstimate {
        value: terms.numerator() / den,
        strategy,
        degenerate: false,
    })
}

/// Degree-only strategies. Panics on `ClosedForm`, which needs the weights.
pub(crate) fn alpha_from_degrees(
    degrees: &[f64],
    m: usize,
    strategy: AlphaStrategy,
) -> AlphaEstimate {
    let stats = degree_stats(degrees, m);
    let value = match strategy {
        AlphaStrategy::TraceRatio => stats.s1 / stats.s2,
        AlphaStrategy::InverseMeanDegree => 1.0 / stats.d_bar,
        AlphaStrategy::Fixed(v) => v,
        AlphaStrategy::ClosedForm => unreachable!("closed form requires the weight field"),
    };
    AlphaEstimate {
        value,
        strategy,
        degenerate: false,
    }
}

/// Per-pixel noise variance gains of the exact and approximate filters.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFactors {
    /// `ν_i = Σ_j w_ij²`
    pub nu: Vec<f64>,
    /// `ν̂_i = Σ_j ŵ_ij²`
    pub nu_hat: Vec<f64>,
    /// `ρ_i = α d_i`
    pub rho: Vec<f64>,
    /// `ρ_i² ν_i + (ρ_i − 1)²`
    pub nu_hat_approx: Vec<f64>,
    /// Exact normalized self-weight `w_ii`.
    pub self_weight: Vec<f64>,
}

pub fn variance_factors(w: &WeightField, alpha: f64) -> Result<VarianceFactors> {
    check_alpha(alpha)?;
    let n = w.pixels();
    let center = w.center_slot();
    let mut out = VarianceFactors {
        nu: Vec::with_capacity(n),
        nu_hat: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        nu_hat_approx: Vec::with_capacity(n),
        self_weight: Vec::with_capacity(n),
    };
    for i in 0..n {
        let d = w.degrees()[i];
        let row = w.row(i);
        let mut nu = 0.0;
        let mut nu_hat = 0.0;
        for (slot, &k) in row.iter().enumerate() {
            if w.neighbor(i, slot).is_none() {
                continue;
            }
            let exact = k / d;
            let approx = if slot == center {
                1.0 + alpha * (k - d)
            } else {
                alpha * k
            };
            nu += exact * exact;
            nu_hat += approx * approx;
        }
        let rho = alpha * d;
        out.nu.push(nu);
        out.nu_hat.push(nu_hat);
        out.rho.push(rho);
        out.nu_hat_approx.push(rho * rho * nu + (rho - 1.0) * (rho - 1.0));
        out.self_weight.push(row[center] / d);
    }
    Ok(out)
}
