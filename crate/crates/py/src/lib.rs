//! Python bindings.
//!
//! ```python
//! import mlenhance as ml
//! y = ml.Plane(4, 4, [0.1] * 16)
//! cfg = ml.Config.preset("sharpen")
//! z = ml.enhance_plane(y, cfg)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use engine::{
    AlphaStrategy, ColorImage, CurveDomain, CurveFamily, CurveSpec, EnhanceConfig, ImagePlane,
    NormMode,
};

fn py_err(e: engine::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Single-channel image, row-major floats.
#[pyclass(name = "Plane", module = "mlenhance", from_py_object)]
#[derive(Clone)]
pub struct Plane {
    inner: ImagePlane,
}

#[pymethods]
impl Plane {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: ImagePlane::new(width, height, data).map_err(py_err)?,
        })
    }

    /// Builds a plane from a list of equally long rows.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        Self::new(width, height, rows.into_iter().flatten().collect())
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.data().chunks(self.inner.width()).map(<[f64]>::to_vec).collect()
    }

    fn max_abs_diff(&self, other: &Plane) -> PyResult<f64> {
        self.inner.ensure_same_dims(&other.inner).map_err(py_err)?;
        Ok(self.inner.max_abs_diff(&other.inner))
    }

    fn __repr__(&self) -> String {
        format!("Plane({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Enhancement parameters; same keys as the text config format.
#[pyclass(name = "Config", module = "mlenhance", from_py_object)]
#[derive(Clone)]
pub struct Config {
    inner: EnhanceConfig,
}

#[pymethods]
impl Config {
    /// Identity config: every curve identity, mask off.
    #[new]
    fn new() -> Self {
        Self {
            inner: EnhanceConfig::default(),
        }
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: engine::resolve_preset(name).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: engine::parse_config(text).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        engine::to_config_string(&self.inner)
    }

    /// Sets one key (e.g. `"h"`, `"levels"`, `"curve.high.a"`).
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        let mut next = self.inner.clone();
        engine::apply_setting(&mut next, key, value).map_err(py_err)?;
        next.validate().map_err(py_err)?;
        self.inner = next;
        Ok(())
    }

    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels
    }

    #[getter]
    fn mask_enabled(&self) -> bool {
        self.inner.mask_enabled
    }

    fn __eq__(&self, other: &Config) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Config(levels={}, mask={})", self.inner.levels, self.inner.mask_enabled)
    }
}

#[pyfunction]
fn enhance_plane(plane: &Plane, config: &Config) -> PyResult<Plane> {
    Ok(Plane {
        inner: engine::enhance_plane(&plane.inner, &config.inner).map_err(py_err)?,
    })
}

/// Enhances a gray (one plane) or RGB (three planes) image.
#[pyfunction]
fn enhance(planes: Vec<Plane>, config: &Config) -> PyResult<Vec<Plane>> {
    let image = ColorImage::new(planes.into_iter().map(|p| p.inner).collect()).map_err(py_err)?;
    let out = engine::enhance(&image, &config.inner).map_err(py_err)?;
    Ok(out.into_planes().into_iter().map(|inner| Plane { inner }).collect())
}

/// Returns `(base, bands, high)` under the config's kernel, levels and
/// normalization.
#[pyfunction]
fn decompose(plane: &Plane, config: &Config) -> PyResult<(Plane, Vec<Plane>, Plane)> {
    let cfg = &config.inner;
    let cascade =
        engine::build_cascade(&plane.inner, &cfg.kernel, cfg.levels, cfg.norm).map_err(py_err)?;
    let stack = engine::decompose(&plane.inner, &cascade).map_err(py_err)?;
    let wrap = |inner| Plane { inner };
    Ok((
        wrap(stack.base),
        stack.bands.into_iter().map(wrap).collect(),
        wrap(stack.high),
    ))
}

/// `1 − d_i / p_i` of the first level.
#[pyfunction]
fn structure_mask(plane: &Plane, config: &Config) -> PyResult<Plane> {
    let field = engine::build_weight_field(&plane.inner, &config.inner.kernel).map_err(py_err)?;
    Ok(Plane {
        inner: engine::structure_mask(&field).as_plane().clone(),
    })
}

/// `(alpha, degenerate)` for `"closed"`, `"trace"`, `"invmean"`.
#[pyfunction]
fn estimate_alpha(plane: &Plane, config: &Config, strategy: &str) -> PyResult<(f64, bool)> {
    let strategy: AlphaStrategy = strategy.parse().map_err(py_err)?;
    let field = engine::build_weight_field(&plane.inner, &config.inner.kernel).map_err(py_err)?;
    let a = engine::estimate_alpha(&field, strategy).map_err(py_err)?;
    Ok((a.value, a.degenerate))
}

/// Filters with the first level only, exactly or normalization-free.
#[pyfunction]
#[pyo3(signature = (plane, config, exact = true, alpha = None))]
fn filter(plane: &Plane, config: &Config, exact: bool, alpha: Option<f64>) -> PyResult<Plane> {
    let field = engine::build_weight_field(&plane.inner, &config.inner.kernel).map_err(py_err)?;
    let inner = if exact {
        engine::apply_exact(&field, &plane.inner)
    } else {
        let a = match alpha {
            Some(a) => a,
            None => 1.0 / engine::field_stats(&field).d_bar,
        };
        engine::apply_norm_free(&field, &plane.inner, a)
    }
    .map_err(py_err)?;
    Ok(Plane { inner })
}

/// Evaluates a tone curve at `values`.
#[pyfunction]
#[pyo3(signature = (family, values, a = 1.0, width = 1.0, domain = "signed", gamma = 0.75, beta = 1.0))]
fn curve_eval(
    family: &str,
    values: Vec<f64>,
    a: f64,
    width: f64,
    domain: &str,
    gamma: f64,
    beta: f64,
) -> PyResult<Vec<f64>> {
    let domain: CurveDomain = domain.parse().map_err(py_err)?;
    let family = match family {
        "identity" => CurveFamily::Identity,
        "linear_gain" => CurveFamily::LinearGain(beta),
        "s_curve" => CurveFamily::SCurve,
        "inverse_s_curve" => CurveFamily::InverseSCurve,
        "gamma_s_curve" => CurveFamily::GammaSCurve,
        other => return Err(PyValueError::new_err(format!("unknown curve family '{other}'"))),
    };
    let spec = CurveSpec {
        family,
        a,
        width,
        gamma,
        domain,
    };
    let curve = engine::make_curve(&spec).map_err(py_err)?;
    Ok(values.into_iter().map(|v| curve.eval(v)).collect())
}

/// Runs the dense-reference checks; returns `(name, passed, detail)` rows.
#[pyfunction]
fn verify() -> Vec<(String, bool, String)> {
    engine::reference::verify_suite()
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

/// Builds a config with the norm-free filter and the given `α` strategy.
#[pyfunction]
fn fast_norm(config: &Config, strategy: &str) -> PyResult<Config> {
    let strategy: AlphaStrategy = strategy.parse().map_err(py_err)?;
    let mut inner = config.inner.clone();
    inner.norm = NormMode::norm_free(strategy);
    inner.validate().map_err(py_err)?;
    Ok(Config { inner })
}

#[pymodule]
#[pyo3(name = "mlenhance")]
pub fn mlenhance_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Plane>()?;
    m.add_class::<Config>()?;
    m.add_function(wrap_pyfunction!(enhance_plane, m)?)?;
    m.add_function(wrap_pyfunction!(enhance, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(structure_mask, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(filter, m)?)?;
    m.add_function(wrap_pyfunction!(curve_eval, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(fast_norm, m)?)?;
    Ok(())
}
