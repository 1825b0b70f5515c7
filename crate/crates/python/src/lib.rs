//! Python bindings: brackets go in and out as nested lists, reports as dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use nalgebra::SMatrix;

use g2coflow::coflow::{self, Direction, IntegratorOptions};
use g2coflow::g2core::{canonical_g2_named, G2Data};
use g2coflow::metric_lie::{BracketMatrix, Mat6};
use g2coflow::{almost_abelian, planar, soliton, verify, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::NotSymplectic(_) | Error::InvalidOptions(_) | Error::InvalidForm(_) | Error::ZeroBracket => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn g2(convention: &str) -> PyResult<G2Data> {
    canonical_g2_named(convention).map_err(err)
}

fn mat6(rows: Vec<Vec<f64>>) -> PyResult<Mat6> {
    if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
        return Err(PyValueError::new_err("bracket must be a 6x6 nested list"));
    }
    Ok(Mat6::from_fn(|i, j| rows[i][j]))
}

fn rows<const N: usize>(m: &SMatrix<f64, N, N>) -> Vec<Vec<f64>> {
    (0..N).map(|i| (0..N).map(|j| m[(i, j)]).collect()).collect()
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(items) => {
            PyList::new(py, items.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// Canonical coclosed G2-structure data for a convention (`section4` or `example`).
#[pyclass(name = "G2Structure", frozen)]
struct PyG2 {
    inner: G2Data,
}

#[pymethods]
impl PyG2 {
    #[new]
    #[pyo3(signature = (convention = "section4"))]
    fn new(convention: &str) -> PyResult<Self> {
        Ok(PyG2 { inner: g2(convention)? })
    }

    #[getter]
    fn convention(&self) -> String {
        self.inner.convention.name().to_string()
    }

    /// Complex structure J on the 6-dimensional ideal.
    fn j(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.j)
    }

    /// `|AJ + JA^t|`; zero exactly on sp(6).
    fn sp_residual(&self, a: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.sp_residual(&mat6(a)?))
    }

    /// Nonzero coefficients of phi as `(indices, value)` pairs.
    fn phi(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.phi.terms().filter(|(_, c)| *c != 0.0).collect()
    }

    fn psi(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.psi.terms().filter(|(_, c)| *c != 0.0).collect()
    }

    fn __repr__(&self) -> String {
        format!("G2Structure('{}')", self.inner.convention.name())
    }
}

/// Result of a bracket-flow integration.
#[pyclass(name = "FlowTrace", frozen)]
struct PyTrace {
    inner: coflow::FlowTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn brackets(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.samples.iter().map(|s| rows(&s.a.0)).collect()
    }

    #[getter]
    fn norm_sq(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.norm_sq).collect()
    }

    #[getter]
    fn scalar_curvature(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.r).collect()
    }

    #[getter]
    fn meta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.meta)
    }

    fn scalar_bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &coflow::scalar_bound_check(&self.inner))
    }

    fn max_norm_increase(&self) -> f64 {
        self.inner.max_norm_increase()
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }
}

#[pyfunction]
#[pyo3(signature = (a, convention = "section4"))]
fn rhs(a: Vec<Vec<f64>>, convention: &str) -> PyResult<Vec<Vec<f64>>> {
    let v = coflow::rhs(&BracketMatrix(mat6(a)?), &g2(convention)?).map_err(err)?;
    Ok(rows(&v))
}

#[pyfunction]
#[pyo3(signature = (a, convention = "section4"))]
fn norm_derivative(a: Vec<Vec<f64>>, convention: &str) -> PyResult<f64> {
    coflow::norm_derivative(&BracketMatrix(mat6(a)?), &g2(convention)?).map_err(err)
}

/// The symmetric 7x7 matrix Q with Laplacian psi = theta(Q) psi.
#[pyfunction]
#[pyo3(signature = (a, convention = "section4"))]
fn q_matrix(a: Vec<Vec<f64>>, convention: &str) -> PyResult<Vec<Vec<f64>>> {
    let q = almost_abelian::q_matrix(&BracketMatrix(mat6(a)?), &g2(convention)?).map_err(err)?;
    Ok(rows(&q.assembled()))
}

#[pyfunction]
#[pyo3(signature = (a, convention = "section4"))]
fn scalar_diagnostics<'py>(py: Python<'py>, a: Vec<Vec<f64>>, convention: &str) -> PyResult<Bound<'py, PyAny>> {
    let d = almost_abelian::scalar_diagnostics(&BracketMatrix(mat6(a)?), &g2(convention)?).map_err(err)?;
    serialize(py, &d)
}

#[pyfunction]
#[pyo3(signature = (
    a, t_end, convention = "section4", rel_tol = 1e-9, abs_tol = 1e-12, max_step = 1.0,
    norm_ceiling = 1e6, output_times = Vec::new()
))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    py: Python<'_>,
    a: Vec<Vec<f64>>,
    t_end: f64,
    convention: &str,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    norm_ceiling: f64,
    output_times: Vec<f64>,
) -> PyResult<PyTrace> {
    let a = BracketMatrix(mat6(a)?);
    let g2 = g2(convention)?;
    let opts = IntegratorOptions {
        rel_tol,
        abs_tol,
        max_step,
        t_end,
        norm_ceiling,
        direction: if t_end < 0.0 { Direction::Backward } else { Direction::Forward },
        output_times,
        ..IntegratorOptions::default()
    };
    let inner = py.detach(|| coflow::integrate(&a, &opts, &g2)).map_err(err)?;
    Ok(PyTrace { inner })
}

/// Soliton certificate; `d1` optionally supplies the derivation block.
#[pyfunction]
#[pyo3(signature = (a, convention = "section4", d1 = None))]
fn certify<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    convention: &str,
    d1: Option<Vec<Vec<f64>>>,
) -> PyResult<Bound<'py, PyAny>> {
    let d1 = d1.map(mat6).transpose()?;
    let rep = soliton::certify(&BracketMatrix(mat6(a)?), d1.as_ref(), &g2(convention)?).map_err(err)?;
    serialize(py, &rep)
}

#[pyfunction]
fn example_soliton<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &soliton::example(name).map_err(err)?)
}

/// Closed-form self-similar bracket at time t for a soliton with derivation D and constant c.
#[pyfunction]
fn self_similar_bracket(a: Vec<Vec<f64>>, d: Vec<Vec<f64>>, c: f64, t: f64) -> PyResult<Vec<Vec<f64>>> {
    if d.len() != 7 || d.iter().any(|r| r.len() != 7) {
        return Err(PyValueError::new_err("D must be a 7x7 nested list"));
    }
    let d = g2coflow::metric_lie::Mat7::from_fn(|i, j| d[i][j]);
    let m = soliton::self_similar_bracket(&BracketMatrix(mat6(a)?), &d, c, t).map_err(err)?;
    Ok(rows(&m))
}

#[pyfunction]
fn planar_rhs(x: f64, y: f64) -> (f64, f64) {
    planar::planar_rhs(x, y)
}

#[pyfunction]
fn planar_embed(x: f64, y: f64) -> Vec<Vec<f64>> {
    rows(&planar::embed(x, y).0)
}

/// `(V, dV/dt)` for `V = (x + y)^2`.
#[pyfunction]
fn lyapunov(x: f64, y: f64) -> (f64, f64) {
    planar::lyapunov(x, y)
}

#[pyfunction]
fn invariant_h(x: f64, y: f64) -> PyResult<f64> {
    planar::invariant_h(x, y).map_err(err)
}

/// `[(t, x, y), ...]` for the planar system.
#[pyfunction]
#[pyo3(signature = (x0, y0, t_end, output_times = Vec::new()))]
fn integrate_planar(x0: f64, y0: f64, t_end: f64, output_times: Vec<f64>) -> PyResult<Vec<(f64, f64, f64)>> {
    Ok(planar::integrate_planar(x0, y0, t_end, &output_times).map_err(err)?.samples)
}

#[pyfunction]
#[pyo3(signature = (lo = -2.0, hi = 2.0, n = 21))]
fn embedding_consistency<'py>(py: Python<'py>, lo: f64, hi: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let g2 = g2("example")?;
    serialize(py, &planar::embedding_consistency_grid(lo, hi, n, &g2).map_err(err)?)
}

/// Runs one verification suite; returns the report dict with a `pass` key.
#[pyfunction]
#[pyo3(signature = (suite, convention = "section4", samples = 100, seed = 0, tol = 1e-10))]
fn verify_suite<'py>(
    py: Python<'py>,
    suite: &str,
    convention: &str,
    samples: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let g2 = g2(convention)?;
    let rep = match suite {
        "appendix" => verify::appendix_suite(&g2, tol).1,
        "complex" => verify::complex_suite(&g2, seed, samples, tol),
        "laplacian" => verify::laplacian_suite(&g2, seed, samples, tol),
        "torsion" => verify::torsion_suite(&g2, seed, samples, tol),
        "bianchi" => verify::bianchi_suite(&g2, seed, samples, tol),
        "connection" => verify::connection_suite(&g2, seed, samples, tol),
        _ => return Err(PyValueError::new_err(format!("unknown suite `{suite}`"))),
    };
    let out = serialize(py, &rep)?;
    out.set_item("pass", rep.pass())?;
    Ok(out)
}

#[pymodule]
fn pyg2coflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyG2>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(norm_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(q_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(example_soliton, m)?)?;
    m.add_function(wrap_pyfunction!(self_similar_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(planar_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(planar_embed, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_h, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_planar, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    Ok(())
}
