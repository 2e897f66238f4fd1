//! Python bindings: `LinearMap` plus the implementability, threshold and
//! verification entry points. Reports come back as plain dicts.

use std::path::PathBuf;

use ncopy::antisym::verify_transposition_eigvec as eigvec_check;
use ncopy::criteria::{necessity_basis_search, necessity_check as necessity, threshold_bounds, transposition_bounds};
use ncopy::extension::DEFAULT_BISECTION_WIDTH;
use ncopy::maps::{noisy_a, noisy_b};
use ncopy::mapspec::MapSpec;
use ncopy::tensor::DEFAULT_MAX_SIDE;
use ncopy::{checks, Error, Limits, TensorOperator, C64, DEFAULT_TOL};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(ncopy_py, DimensionLimitError, PyValueError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::DimensionLimit { .. } => DimensionLimitError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn operator(dims: Vec<usize>, rows: Vec<Vec<C64>>) -> PyResult<TensorOperator> {
    TensorOperator::from_rows(dims, &rows).map_err(py_err)
}

/// Linear map stored as its Choi operator with dims `[d_in, d_out]`.
#[pyclass(name = "LinearMap", module = "ncopy_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLinearMap {
    inner: ncopy::LinearMap,
}

impl From<ncopy::LinearMap> for PyLinearMap {
    fn from(inner: ncopy::LinearMap) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyLinearMap {
    /// Choi matrix as rows of complex numbers, row index `i * d_out + a`.
    #[new]
    fn new(choi: Vec<Vec<C64>>, d_in: usize, d_out: usize) -> PyResult<Self> {
        let op = operator(vec![d_in, d_out], choi)?;
        Ok(ncopy::LinearMap::from_choi(op).map_err(py_err)?.into())
    }

    /// Builds a map from the CLI spec grammar, e.g. `"mix:[id:d=2@0.5,T:d=2@0.5]"`.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        let parsed = MapSpec::parse(spec).map_err(py_err)?;
        Ok(parsed.resolve().map_err(py_err)?.into())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(ncopy::LinearMap::from_json(text).map_err(py_err)?.into())
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(ncopy::LinearMap::load(path).map_err(py_err)?.into())
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn d_in(&self) -> usize {
        self.inner.d_in()
    }

    #[getter]
    fn d_out(&self) -> usize {
        self.inner.d_out()
    }

    #[getter]
    fn choi(&self) -> Vec<Vec<C64>> {
        self.inner.choi().rows()
    }

    fn apply(&self, rho: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        let rho = operator(vec![self.inner.d_in()], rho)?;
        Ok(self.inner.apply(&rho).map_err(py_err)?.rows())
    }

    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn is_trace_preserving(&self, tol: f64) -> bool {
        self.inner.is_trace_preserving(tol)
    }

    /// `(1-η) Λ(ρ) + η (Tr L/d_in)(I/d_out) Tr ρ`
    fn noisy_a(&self, eta: f64) -> PyResult<Self> {
        Ok(noisy_a(&self.inner, eta).map_err(py_err)?.into())
    }

    /// `(1-η) Λ(ρ) + η Λ(I/d_in) Tr ρ`
    fn noisy_b(&self, eta: f64) -> PyResult<Self> {
        Ok(noisy_b(&self.inner, eta).map_err(py_err)?.into())
    }

    fn __repr__(&self) -> String {
        format!("LinearMap(d_in={}, d_out={})", self.inner.d_in(), self.inner.d_out())
    }
}

#[pyfunction]
#[pyo3(signature = (map, n, tol = DEFAULT_TOL, max_dim = DEFAULT_MAX_SIDE))]
fn implementable<'py>(
    py: Python<'py>,
    map: &PyLinearMap,
    n: usize,
    tol: f64,
    max_dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = ncopy::implementable(&map.inner, n, tol, &Limits::new(max_dim)).map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (map, n_max, tol = DEFAULT_TOL, max_dim = DEFAULT_MAX_SIDE))]
fn min_copies<'py>(
    py: Python<'py>,
    map: &PyLinearMap,
    n_max: usize,
    tol: f64,
    max_dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let result = ncopy::min_copies(&map.inner, n_max, tol, &Limits::new(max_dim)).map_err(py_err)?;
    to_dict(py, &result)
}

#[pyfunction]
#[pyo3(signature = (map, n, tol = DEFAULT_TOL, max_dim = DEFAULT_MAX_SIDE))]
fn critical_eta_a(map: &PyLinearMap, n: usize, tol: f64, max_dim: usize) -> PyResult<f64> {
    ncopy::critical_eta_a(&map.inner, n, tol, &Limits::new(max_dim)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (map, n, width = DEFAULT_BISECTION_WIDTH, max_dim = DEFAULT_MAX_SIDE))]
fn critical_eta_b(map: &PyLinearMap, n: usize, width: f64, max_dim: usize) -> PyResult<f64> {
    ncopy::critical_eta_b(&map.inner, n, width, &Limits::new(max_dim)).map_err(py_err)
}

/// Closed-form sufficient noise levels for `d0 -> d1` maps.
#[pyfunction]
#[pyo3(signature = (d0, d1, n, improved = true))]
fn bounds<'py>(py: Python<'py>, d0: usize, d1: usize, n: usize, improved: bool) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &threshold_bounds(d0, d1, n, improved).map_err(py_err)?)
}

#[pyfunction]
fn transposition_thresholds<'py>(py: Python<'py>, d: usize, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &transposition_bounds(d, n).map_err(py_err)?)
}

/// Necessity test in the computational basis, plus `trials` random bases.
#[pyfunction]
#[pyo3(signature = (map, n, tol = DEFAULT_TOL, trials = 0, seed = 0))]
fn necessity_check<'py>(
    py: Python<'py>,
    map: &PyLinearMap,
    n: usize,
    tol: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = if trials == 0 {
        necessity(&map.inner, n, None, tol)
    } else {
        necessity_basis_search(&map.inner, n, trials, seed, tol)
    }
    .map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (d, n, max_dim = DEFAULT_MAX_SIDE))]
fn verify_transposition_eigvec<'py>(
    py: Python<'py>,
    d: usize,
    n: usize,
    max_dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &eigvec_check(d, n, &Limits::new(max_dim)).map_err(py_err)?)
}

/// Runs the built-in verification suite; `only` filters by id substrings.
#[pyfunction]
#[pyo3(signature = (only = None, tol = None, seed = 0, max_dim = DEFAULT_MAX_SIDE))]
fn run_checks<'py>(
    py: Python<'py>,
    only: Option<&str>,
    tol: Option<f64>,
    seed: u64,
    max_dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let outcomes = py
        .detach(|| checks::run(tol, only, seed, &Limits::new(max_dim)))
        .map_err(py_err)?;
    to_dict(py, &outcomes)
}

#[pymodule]
fn ncopy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLinearMap>()?;
    m.add("DimensionLimitError", m.py().get_type::<DimensionLimitError>())?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    m.add_function(wrap_pyfunction!(implementable, m)?)?;
    m.add_function(wrap_pyfunction!(min_copies, m)?)?;
    m.add_function(wrap_pyfunction!(critical_eta_a, m)?)?;
    m.add_function(wrap_pyfunction!(critical_eta_b, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(transposition_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(necessity_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify_transposition_eigvec, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    m.add("check_ids", checks::check_ids())?;
    Ok(())
}
