//! Flat `key = value` configuration text.
//!
//! ```text
//! # comments start with '#'
//! kernel = nlm
//! h = 0.7
//! window = 2
//! levels = 2
//! curve.high.family = s_curve
//! curve.high.a = 20
//! curve.high.width = 0.66
//! ```
//!
//! Layer names are `base`, `band1` … `band{k-1}` and `high`. The same keys
//! are accepted by `--set KEY=VALUE` on the command line. `levels` is applied
//! before any other key so curve keys always address the final layer count.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::normfilter::{AlphaStrategy, FilterMode};
use crate::pipeline::{layer_name, EnhanceConfig};
use crate::tonemap::{CurveFamily, CurveSpec};

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(format!("{key}: cannot parse '{value}'")))
}

fn parse_switch(key: &str, value: &str) -> Result<bool> {
    match value {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(format!("{key}: expected on/off, got '{value}'"))),
    }
}

fn switch(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

fn layer_index(name: &str, levels: usize) -> Result<usize> {
    match name {
        "base" => Ok(0),
        "high" => Ok(levels),
        band => band
            .strip_prefix("band")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1 && n < levels)
            .ok_or_else(|| invalid(format!("unknown layer '{name}' for k = {levels}"))),
    }
}

fn set_curve_field(curve: &mut CurveSpec, field: &str, key: &str, value: &str) -> Result<()> {
    match field {
        "family" => {
            curve.family = match value {
                "identity" => CurveFamily::Identity,
                "linear_gain" | "linear" => match curve.family {
                    CurveFamily::LinearGain(b) => CurveFamily::LinearGain(b),
                    _ => CurveFamily::LinearGain(1.0),
                },
                "s_curve" => CurveFamily::SCurve,
                "inverse_s_curve" => CurveFamily::InverseSCurve,
                "gamma_s_curve" => CurveFamily::GammaSCurve,
                other => return Err(invalid(format!("{key}: unknown curve family '{other}'"))),
            }
        }
        "beta" => curve.family = CurveFamily::LinearGain(parse_num(key, value)?),
        "a" => curve.a = parse_num(key, value)?,
        "width" => curve.width = parse_num(key, value)?,
        "gamma" => curve.gamma = parse_num(key, value)?,
        "domain" => curve.domain = value.parse()?,
        other => return Err(invalid(format!("{key}: unknown curve field '{other}'"))),
    }
    Ok(())
}

/// Applies one `key = value` setting.
pub fn apply_setting(cfg: &mut EnhanceConfig, key: &str, value: &str) -> Result<()> {
    let key = key.trim();
    let value = value.trim();
    match key {
        "kernel" => cfg.kernel.kind = value.parse()?,
        "spatial" => cfg.kernel.spatial_term = parse_switch(key, value)?,
        "h" | "h_y" => cfg.kernel.h_y = parse_num(key, value)?,
        "hx" | "h_x" => cfg.kernel.h_x = parse_num(key, value)?,
        "window" => cfg.kernel.window_radius = parse_num(key, value)?,
        "patch" => cfg.kernel.patch_radius = parse_num(key, value)?,
        "levels" => cfg.set_levels(parse_num(key, value)?)?,
        "norm" => {
            cfg.norm.mode = match value {
                "exact" => FilterMode::Exact,
                "fast" | "norm_free" => FilterMode::NormFree,
                other => return Err(invalid(format!("{key}: expected exact/fast, got '{other}'"))),
            }
        }
        "alpha" => cfg.norm.alpha = value.parse::<AlphaStrategy>()?,
        "mask" => cfg.mask_enabled = parse_switch(key, value)?,
        "mask.source" => cfg.mask_source_level = parse_num(key, value)?,
        "mask.gamma" => cfg.mask_gamma = parse_num(key, value)?,
        "color" => cfg.color_mode = value.parse()?,
        _ => {
            let rest = key
                .strip_prefix("curve.")
                .ok_or_else(|| invalid(format!("unknown key '{key}'")))?;
            let (layer, field) = rest
                .split_once('.')
                .ok_or_else(|| invalid(format!("malformed curve key '{key}'")))?;
            let idx = layer_index(layer, cfg.levels)?;
            set_curve_field(&mut cfg.curves[idx], field, key, value)?;
        }
    }
    Ok(())
}

/// Parses a full config, starting from the identity defaults.
pub fn parse_config(text: &str) -> Result<EnhanceConfig> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Config {
            line: n + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        entries.push((n + 1, key.trim().to_string(), value.trim().to_string()));
    }
    let mut cfg = EnhanceConfig::default();
    let (levels, rest): (Vec<_>, Vec<_>) = entries.into_iter().partition(|(_, k, _)| k == "levels");
    for (line, key, value) in levels.into_iter().chain(rest) {
        apply_setting(&mut cfg, &key, &value).map_err(|e| Error::Config {
            line,
            message: e.to_string(),
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Serializes every field; `parse_config` restores an identical config.
pub fn to_config_string(cfg: &EnhanceConfig) -> String {
    let mut s = String::new();
    let k = &cfg.kernel;
    let norm = match cfg.norm.mode {
        FilterMode::Exact => "exact",
        FilterMode::NormFree => "fast",
    };
    let _ = writeln!(s, "kernel = {}", k.kind.as_str());
    let _ = writeln!(s, "spatial = {}", switch(k.spatial_term));
    let _ = writeln!(s, "h = {}", k.h_y);
    let _ = writeln!(s, "hx = {}", k.h_x);
    let _ = writeln!(s, "window = {}", k.window_radius);
    let _ = writeln!(s, "patch = {}", k.patch_radius);
    let _ = writeln!(s, "levels = {}", cfg.levels);
    let _ = writeln!(s, "norm = {norm}");
    let _ = writeln!(s, "alpha = {}", cfg.norm.alpha);
    let _ = writeln!(s, "mask = {}", switch(cfg.mask_enabled));
    let _ = writeln!(s, "mask.source = {}", cfg.mask_source_level);
    let _ = writeln!(s, "mask.gamma = {}", cfg.mask_gamma);
    let _ = writeln!(s, "color = {}", cfg.color_mode);
    for (i, c) in cfg.curves.iter().enumerate() {
        let prefix = format!("curve.{}", layer_name(i, cfg.levels));
        let _ = writeln!(s, "{prefix}.family = {}", c.family.name());
        if let CurveFamily::LinearGain(beta) = c.family {
            let _ = writeln!(s, "{prefix}.beta = {beta}");
        }
        let _ = writeln!(s, "{prefix}.a = {}", c.a);
        let _ = writeln!(s, "{prefix}.width = {}", c.width);
        let _ = writeln!(s, "{prefix}.gamma = {}", c.gamma);
        let _ = writeln!(s, "{prefix}.domain = {}", c.domain);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{preset_config, Preset};
    use crate::tonemap::CurveDomain;

    #[test]
    fn presets_round_trip() {
        for p in Preset::ALL {
            let cfg = preset_config(p);
            let text = to_config_string(&cfg);
            assert_eq!(parse_config(&text).unwrap(), cfg, "{}", p.name());
        }
    }

    #[test]
    fn levels_applied_first() {
        let text = "curve.band3.family = s_curve\ncurve.band3.a = 7\ncurve.band3.width = 0.4\nlevels = 4\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.curves.len(), 5);
        assert_eq!(cfg.curves[3].family, CurveFamily::SCurve);
        assert_eq!(cfg.curves[3].a, 7.0);
    }

    #[test]
    fn comments_and_errors() {
        let cfg = parse_config("# hello\n\nnorm = exact # trailing\nalpha = 0.05\n").unwrap();
        assert_eq!(cfg.norm.mode, FilterMode::Exact);
        assert_eq!(cfg.norm.alpha, AlphaStrategy::Fixed(0.05));
        assert!(matches!(
            parse_config("norm exact"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\nwindow = two"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(parse_config("curve.band1.a = 3\nlevels = 1").is_err());
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("curve.high.family = s_curve\ncurve.high.width = 3").is_err());
    }

    #[test]
    fn beta_switches_family() {
        let mut cfg = EnhanceConfig::default();
        apply_setting(&mut cfg, "curve.high.beta", "0").unwrap();
        assert_eq!(cfg.curves[2].family, CurveFamily::LinearGain(0.0));
        apply_setting(&mut cfg, "curve.base.family", "gamma_s_curve").unwrap();
        apply_setting(&mut cfg, "curve.base.domain", "base").unwrap();
        assert_eq!(cfg.curves[0].domain, CurveDomain::Base);
        cfg.validate().unwrap();
    }
}
