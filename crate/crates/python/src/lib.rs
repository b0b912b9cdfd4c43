//! Python module `pyesscirc`.
//!
//! Structured results (fit reports, order selections, test results) cross
//! the boundary as plain dicts built from their serde representation.

use esscirc::experiments::{export_tables, run_campaign};
use esscirc::{AngleUnit, BaseFamily, EssError, FitConfig, SimCampaign};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn err(e: EssError) -> PyErr {
    match e {
        EssError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<BaseFamily> {
    name.parse().map_err(err)
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// ESS distribution: `family` is "vm" or "wc", `conc` is kappa or rho.
#[pyclass(name = "EssModel", module = "pyesscirc", frozen)]
struct PyEssModel {
    inner: esscirc::EssModel,
}

#[pymethods]
impl PyEssModel {
    #[new]
    #[pyo3(signature = (family, conc, lam, m = 0, mu = 0.0))]
    fn new(family: &str, conc: f64, lam: f64, m: usize, mu: f64) -> PyResult<Self> {
        let inner =
            esscirc::EssModel::from_family(self::family(family)?, mu, conc, lam, m).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family().to_string()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn conc(&self) -> f64 {
        self.inner.concentration()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.order()
    }

    fn density(&self, theta: Vec<f64>) -> Vec<f64> {
        theta.into_iter().map(|t| self.inner.density(t)).collect()
    }

    fn log_density(&self, theta: Vec<f64>) -> Vec<f64> {
        theta
            .into_iter()
            .map(|t| self.inner.log_density(t))
            .collect()
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.inner.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// `{p, alpha, beta, md, mrl}` of the `p`th trigonometric moment.
    #[pyo3(signature = (p = 1))]
    fn moments(&self, py: Python<'_>, p: i64) -> PyResult<Py<PyAny>> {
        to_py(py, &esscirc::moments(&self.inner, p).map_err(err)?)
    }

    fn skewness(&self) -> PyResult<f64> {
        esscirc::circular_skewness(&self.inner).map_err(err)
    }

    fn log_likelihood(&self, data: Vec<f64>) -> PyResult<f64> {
        esscirc::log_likelihood(&self.inner, &data).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "EssModel(family={:?}, conc={}, lam={}, m={}, mu={})",
            self.family(),
            self.conc(),
            self.lam(),
            self.m(),
            self.mu()
        )
    }
}

/// Maximum-likelihood fit; returns the full report as a dict.
#[pyfunction]
#[pyo3(signature = (data, family, m, delta_lambda = 0.0))]
fn fit(
    py: Python<'_>,
    data: Vec<f64>,
    family: &str,
    m: usize,
    delta_lambda: f64,
) -> PyResult<Py<PyAny>> {
    let config = FitConfig::new(self::family(family)?, m).with_delta_lambda(delta_lambda);
    let report = py
        .detach(|| esscirc::fit_mle(&data, &config))
        .map_err(err)?;
    to_py(py, &report)
}

/// Fits every order in `grid`; `m_mll` and `m_tic` name the selections.
#[pyfunction]
#[pyo3(signature = (data, family, grid = vec![0, 1, 2, 3, 4], delta_lambda = 0.0))]
fn select_order(
    py: Python<'_>,
    data: Vec<f64>,
    family: &str,
    grid: Vec<usize>,
    delta_lambda: f64,
) -> PyResult<Py<PyAny>> {
    let template = FitConfig::new(self::family(family)?, 0).with_delta_lambda(delta_lambda);
    let sel = py
        .detach(|| esscirc::select_order_with(&data, &template, &grid))
        .map_err(err)?;
    to_py(py, &sel)
}

#[pyfunction]
fn symmetry_test(py: Python<'_>, data: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &esscirc::symmetry_test(&data).map_err(err)?)
}

#[pyfunction]
fn sample_stats(py: Python<'_>, data: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &esscirc::sample_circular_stats(&data).map_err(err)?)
}

/// Skewness extrema of the von Mises family at order `m`.
#[pyfunction]
fn skewness_range(py: Python<'_>, m: usize) -> PyResult<Py<PyAny>> {
    to_py(
        py,
        &esscirc::skewness_range(BaseFamily::Vm, m).map_err(err)?,
    )
}

/// Reads an angle file onto `[-pi, pi)`; degrees default to a `-pi` shift.
#[pyfunction]
#[pyo3(signature = (path, unit = "radians", shift = None))]
fn load_angles(path: &str, unit: &str, shift: Option<f64>) -> PyResult<Vec<f64>> {
    let unit: AngleUnit = unit.parse().map_err(err)?;
    Ok(esscirc::ingest(path, unit, shift).map_err(err)?.angles)
}

#[pyfunction]
fn wrap_angle(theta: f64) -> f64 {
    esscirc::wrap_angle(theta)
}

/// Runs a campaign given as TOML text; writes the tables when `out_dir` is
/// given. Returns the per-cell summaries.
#[pyfunction]
#[pyo3(signature = (config, workers = 0, out_dir = None))]
fn simulate(
    py: Python<'_>,
    config: &str,
    workers: usize,
    out_dir: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let campaign = SimCampaign::from_toml_str(config).map_err(err)?;
    let summaries = py
        .detach(|| run_campaign(&campaign, workers))
        .map_err(err)?;
    if let Some(dir) = out_dir {
        export_tables(&summaries, dir).map_err(err)?;
    }
    to_py(py, &summaries)
}

#[pymodule]
fn pyesscirc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEssModel>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(select_order, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_test, m)?)?;
    m.add_function(wrap_pyfunction!(sample_stats, m)?)?;
    m.add_function(wrap_pyfunction!(skewness_range, m)?)?;
    m.add_function(wrap_pyfunction!(load_angles, m)?)?;
    m.add_function(wrap_pyfunction!(wrap_angle, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
