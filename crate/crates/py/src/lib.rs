//! Python bindings. Reports come back as plain dicts with the same shape as
//! the JSON written by the `gh` tool.

use gh_core::metricspace::FiniteMetricSpace;
use gh_core::GhError as CoreError;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

pyo3::create_exception!(
    ghmetric,
    GhError,
    PyValueError,
    "Raised for invalid input or failed checks."
);

fn to_py_err(err: CoreError) -> PyErr {
    GhError::new_err(err.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite metric space given by its distance matrix.
#[pyclass(name = "MetricSpace", module = "ghmetric", frozen)]
pub struct PyMetricSpace {
    inner: FiniteMetricSpace,
}

#[pymethods]
impl PyMetricSpace {
    #[new]
    #[pyo3(signature = (matrix, labels = None))]
    fn new(matrix: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let mut inner = FiniteMetricSpace::new(matrix).map_err(to_py_err)?;
        if let Some(labels) = labels {
            inner = inner.with_labels(labels).map_err(to_py_err)?;
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        gh_core::io::space_from_json(text)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        gh_core::io::space_to_json(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.inner.labels().map(<[String]>::to_vec)
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.n() || j >= self.inner.n() {
            return Err(pyo3::exceptions::PyIndexError::new_err(
                "point index out of range",
            ));
        }
        Ok(self.inner.dist(i, j))
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        gh_core::metricspace::scale(&self.inner, factor)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricSpace(n={}, diameter={})",
            self.inner.n(),
            self.inner.diameter()
        )
    }
}

fn wrap(inner: FiniteMetricSpace) -> PyMetricSpace {
    PyMetricSpace { inner }
}

/// Exact distance with an optimal correspondence. `method` is "star" or "oracle".
#[pyfunction]
#[pyo3(signature = (x, y, method = "star"))]
fn gh_distance<'py>(
    py: Python<'py>,
    x: &PyMetricSpace,
    y: &PyMetricSpace,
    method: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let result = match method {
        "star" => gh_core::ghdist::gh_exact(&x.inner, &y.inner),
        "oracle" => gh_core::ghdist::gh_oracle(&x.inner, &y.inner),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(to_py_err)?;
    to_py(py, &result)
}

/// Minimal distance `s`, triangle excess `t` and asymmetry `e`.
#[pyfunction]
fn characteristics<'py>(py: Python<'py>, x: &PyMetricSpace) -> PyResult<Bound<'py, PyAny>> {
    let report = gh_core::metricspace::characteristics(&x.inner).map_err(to_py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (n, seed, amplitude = 0.25))]
fn perturbed_generic<'py>(
    py: Python<'py>,
    n: usize,
    seed: u64,
    amplitude: f64,
) -> PyResult<(PyMetricSpace, Bound<'py, PyAny>)> {
    let g = gh_core::generic::perturbed_generic(n, seed, amplitude).map_err(to_py_err)?;
    Ok((wrap(g.space.clone()), to_py(py, &g.report)?))
}

#[pyfunction]
fn shramov_space<'py>(
    py: Python<'py>,
    m: usize,
    epsilon: f64,
) -> PyResult<(PyMetricSpace, Bound<'py, PyAny>)> {
    let s = gh_core::generic::shramov_space(m, epsilon).map_err(to_py_err)?;
    Ok((wrap(s.space.clone()), to_py(py, &s.report)?))
}

/// Point at parameter `t` on a geodesic through an optimal correspondence.
#[pyfunction]
fn geodesic_point(x: &PyMetricSpace, y: &PyMetricSpace, t: f64) -> PyResult<PyMetricSpace> {
    let gh = gh_core::ghdist::gh_exact(&x.inner, &y.inner).map_err(to_py_err)?;
    gh_core::ghdist::geodesic_point(&x.inner, &y.inner, &gh.optimal, t)
        .map(wrap)
        .map_err(to_py_err)
}

fn verify_options(
    samples: usize,
    seed: u64,
    epsilon: Option<f64>,
) -> gh_core::stability::VerifyOptions {
    let options = gh_core::stability::VerifyOptions::new(samples, seed);
    match epsilon {
        Some(eps) => options.with_epsilon(eps),
        None => options,
    }
}

#[pyfunction]
#[pyo3(signature = (anchor, samples, seed, epsilon = None))]
fn verify_local_isometry<'py>(
    py: Python<'py>,
    anchor: &PyMetricSpace,
    samples: usize,
    seed: u64,
    epsilon: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = gh_core::stability::verify_local_isometry(
        &anchor.inner,
        &verify_options(samples, seed, epsilon),
    )
    .map_err(to_py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (anchor, samples, seed, epsilon = None))]
fn verify_interiority<'py>(
    py: Python<'py>,
    anchor: &PyMetricSpace,
    samples: usize,
    seed: u64,
    epsilon: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = gh_core::stability::verify_interiority(
        &anchor.inner,
        &verify_options(samples, seed, epsilon),
    )
    .map_err(to_py_err)?;
    to_py(py, &report)
}

/// Embeds `x` and returns the full report; `report["status"]` is "isometric"
/// when every image distance matches.
#[pyfunction]
fn embed<'py>(py: Python<'py>, x: &PyMetricSpace, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &gh_core::embed::embed_report(&x.inner, seed))
}

#[pymodule]
mod ghmetric {
    #[pymodule_export]
    use super::{
        characteristics, embed, geodesic_point, gh_distance, perturbed_generic, shramov_space,
        verify_interiority, verify_local_isometry, GhError, PyMetricSpace,
    };
}
