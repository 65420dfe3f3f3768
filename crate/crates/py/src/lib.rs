//! Python bindings: kernels, transforms, preset runs and decay fits.

use std::collections::HashMap;
use std::path::PathBuf;

use backstep::experiment::{run_experiment, ExperimentConfig, PRESETS};
use backstep::fit::{default_window, fit_decay as fit};
use backstep::grid::Grid;
use backstep::kernelgen::{kernel_residual, read_kernel, write_kernel};
use backstep::transform::{decay_constant, TransformMatrix};
use backstep::{BcFamily, Error, KernelRole, PhysicsParams, SolveOptions};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Params", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: PhysicsParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (beta, alpha, delta, r, length = std::f64::consts::PI, family = "A", power = None))]
    fn new(beta: f64, alpha: f64, delta: f64, r: f64, length: f64, family: &str, power: Option<f64>) -> PyResult<Self> {
        let family: BcFamily = family.parse().map_err(to_py)?;
        let mut inner = PhysicsParams::new(beta, alpha, delta, r, length, family).map_err(to_py)?;
        inner.power = power;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }
    #[getter]
    fn r(&self) -> f64 {
        self.inner.rate
    }
    #[getter]
    fn length(&self) -> f64 {
        self.inner.length
    }
    #[getter]
    fn family(&self) -> String {
        self.inner.family.to_string()
    }
    #[getter]
    fn power(&self) -> Option<f64> {
        self.inner.power
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Params(beta={}, alpha={}, delta={}, r={}, length={}, family={:?}, power={:?})",
            p.beta,
            p.alpha,
            p.delta,
            p.rate,
            p.length,
            p.family.to_string(),
            p.power
        )
    }
}

#[pyclass(name = "Kernel", frozen)]
struct PyKernel {
    inner: backstep::Kernel,
}

fn opts(tol: f64, max_iter: usize) -> SolveOptions {
    SolveOptions {
        tol,
        max_iter,
        ..Default::default()
    }
}

#[pymethods]
impl PyKernel {
    /// Control kernel (`k` for family A, `l` for family B).
    #[staticmethod]
    #[pyo3(signature = (params, tol = 1e-12, max_iter = 200))]
    fn solve(py: Python<'_>, params: PyParams, tol: f64, max_iter: usize) -> PyResult<Self> {
        let k = py
            .detach(|| backstep::solve_kernel(&params.inner, &opts(tol, max_iter)))
            .map_err(to_py)?;
        Ok(Self { inner: k })
    }

    #[staticmethod]
    #[pyo3(signature = (params, tol = 1e-12, max_iter = 200))]
    fn observer(py: Python<'_>, params: PyParams, tol: f64, max_iter: usize) -> PyResult<Self> {
        let k = py
            .detach(|| backstep::observer_kernel(&params.inner, &opts(tol, max_iter)))
            .map_err(to_py)?;
        Ok(Self { inner: k })
    }

    #[staticmethod]
    fn from_table(text: &str) -> PyResult<Self> {
        let k = read_kernel(text.as_bytes()).map_err(to_py)?;
        Ok(Self { inner: k })
    }

    fn to_table(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_kernel(&self.inner, &mut buf).map_err(to_py)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[pyo3(signature = (x, y, dx = 0, dy = 0))]
    fn eval(&self, x: f64, y: f64, dx: usize, dy: usize) -> PyResult<Complex64> {
        self.inner.eval(x, y, dx, dy).map_err(to_py)
    }

    fn observer_gain(&self, xs: Vec<f64>) -> PyResult<Vec<Complex64>> {
        self.inner.observer_gain(&xs).map_err(to_py)
    }

    /// `{"pde_sup": ..., "bc_sup": ...}` on the 51 x 51 check lattice.
    fn residual(&self) -> HashMap<String, f64> {
        let r = kernel_residual(&self.inner);
        let mut m = HashMap::from([("pde_sup".to_string(), r.pde_sup), ("bc_sup".to_string(), r.bc_sup)]);
        m.extend(r.bc_parts);
        m
    }

    #[getter]
    fn role(&self) -> &'static str {
        self.inner.role().name()
    }
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }
    #[getter]
    fn degree(&self) -> usize {
        self.inner.poly().degree()
    }
    #[getter]
    fn increments(&self) -> Vec<f64> {
        self.inner.increments().to_vec()
    }
    #[getter]
    fn params(&self) -> PyParams {
        PyParams {
            inner: *self.inner.params(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(role={}, iterations={}, degree={})",
            self.inner.role().name(),
            self.inner.iterations(),
            self.inner.poly().degree()
        )
    }
}

/// Discrete `I - U` on a uniform grid of `nodes` points.
#[pyclass(name = "Transform", frozen)]
struct PyTransform {
    inner: TransformMatrix,
    ck: f64,
}

#[pymethods]
impl PyTransform {
    #[new]
    fn new(kernel: &PyKernel, nodes: usize) -> PyResult<Self> {
        let grid = Grid::new(nodes, kernel.inner.length()).map_err(to_py)?;
        let inner = TransformMatrix::build(&kernel.inner, &grid).map_err(to_py)?;
        let ck = if kernel.inner.role() == KernelRole::ObserverP {
            f64::NAN
        } else {
            decay_constant(&inner, &kernel.inner)
        };
        Ok(Self { inner, ck })
    }

    fn xs(&self) -> Vec<f64> {
        self.inner.grid().xs()
    }

    fn forward(&self, u: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.grid().check_len(u.len()).map_err(to_py)?;
        Ok(self.inner.forward_values(&u))
    }

    fn invert(&self, w: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.grid().check_len(w.len()).map_err(to_py)?;
        Ok(self.inner.invert_values(&w))
    }

    /// `||(I - U)^{-1}|| (1 + ||k||)`; NaN for observer kernels.
    #[getter]
    fn decay_constant(&self) -> f64 {
        self.ck
    }
}

/// Run a preset with optional `key -> value` overrides. Returns
/// `{"summary": <json str>, "t": [...], "<column>": [...], ...}`.
#[pyfunction]
#[pyo3(signature = (name, overrides = None, cache = None))]
fn run_preset(
    py: Python<'_>,
    name: &str,
    overrides: Option<HashMap<String, String>>,
    cache: Option<PathBuf>,
) -> PyResult<HashMap<String, Py<PyAny>>> {
    let mut cfg = ExperimentConfig::preset(name).map_err(to_py)?;
    for (k, v) in overrides.unwrap_or_default() {
        cfg.set(&k, &v).map_err(to_py)?;
    }
    let outcome = py
        .detach(|| run_experiment(&cfg, cache.as_deref()))
        .map_err(to_py)?;
    let summary = serde_json::to_string(&outcome.summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let mut out = HashMap::new();
    out.insert("summary".to_string(), summary.into_pyobject(py)?.into_any().unbind());
    out.insert("t".to_string(), outcome.record.times.into_pyobject(py)?.into_any().unbind());
    for (col, vals) in outcome.record.columns {
        out.insert(col, vals.into_pyobject(py)?.into_any().unbind());
    }
    Ok(out)
}

/// Least-squares `(rate, amplitude, residual)` of `values ~ a exp(-rate t)`.
#[pyfunction]
#[pyo3(signature = (times, values, window = None))]
fn fit_decay(times: Vec<f64>, values: Vec<f64>, window: Option<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    if times.is_empty() {
        return Err(PyValueError::new_err("empty series"));
    }
    let w = window.unwrap_or_else(|| default_window(&times));
    let f = fit(&times, &values, w).map_err(to_py)?;
    Ok((f.rate, f.amplitude, f.residual))
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    PRESETS.to_vec()
}

#[pymodule]
fn backstep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyTransform>()?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
