//! Python bindings: mesh generation, solver runs, property checks and the
//! cohomology report.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dgcomplex::app::{generate_mesh, parse_space, property_suite, MeshKind};
use dgcomplex::diagnostics::ConvergenceTable;
use dgcomplex::mesh::{load_mesh, save_mesh};
use dgcomplex::operators::cohomology_report;
use dgcomplex::solver::{run_case, InitKind, RunConfig};
use dgcomplex::spaces::DiscreteComplex;
use dgcomplex::systems::{make_test_case, CaseId, FluxFamily};

fn py_err(e: dgcomplex::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Periodic mesh of the unit torus.
#[pyclass(name = "Mesh", frozen)]
pub struct PyMesh {
    pub inner: Arc<dgcomplex::mesh::Mesh>,
}

#[pymethods]
impl PyMesh {
    /// `kind` is `cartesian`, `perturbed` or `triangles`.
    #[new]
    #[pyo3(signature = (kind, nx, ny=None, perturb=0.2, seed=42))]
    fn new(kind: &str, nx: usize, ny: Option<usize>, perturb: f64, seed: u64) -> PyResult<PyMesh> {
        let kind = MeshKind::parse(kind).map_err(py_err)?;
        let m = generate_mesh(kind, nx, ny.unwrap_or(nx), perturb, seed).map_err(py_err)?;
        Ok(PyMesh { inner: Arc::new(m) })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<PyMesh> {
        Ok(PyMesh { inner: Arc::new(load_mesh(text).map_err(py_err)?) })
    }

    fn to_text(&self) -> String {
        save_mesh(&self.inner)
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_sides(&self) -> usize {
        self.inner.n_sides()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn h_min(&self) -> f64 {
        self.inner.h_min()
    }

    fn validate(&self) -> bool {
        self.inner.validate().passed()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(cells={}, sides={}, vertices={})", self.inner.n_cells(), self.inner.n_sides(), self.inner.n_vertices())
    }
}

/// Diagnostics of a finished run.
#[pyclass(name = "RunResult", frozen)]
pub struct PyRunResult {
    #[pyo3(get)]
    steps: usize,
    #[pyo3(get)]
    dt: f64,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    drift: Vec<f64>,
    #[pyo3(get)]
    energy: Vec<f64>,
    #[pyo3(get)]
    errors: BTreeMap<String, f64>,
    #[pyo3(get)]
    vector_coeffs: Vec<f64>,
}

#[pymethods]
impl PyRunResult {
    fn max_drift(&self) -> f64 {
        self.drift.iter().cloned().fold(0.0, f64::max)
    }

    fn __repr__(&self) -> String {
        format!("RunResult(steps={}, dt={:e}, max_drift={:e})", self.steps, self.dt, self.max_drift())
    }
}

/// Runs a test case. `space` is `dBdiv`, `dBcurl` or `dQ`; `init` is `l2`
/// or `divfree`.
#[pyfunction]
#[pyo3(signature = (case, mesh, degree, space, flux, t_final=None, rk_order=None, cfl=None, init="l2", stride=1))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    case: &str,
    mesh: &PyMesh,
    degree: usize,
    space: &str,
    flux: &str,
    t_final: Option<f64>,
    rk_order: Option<usize>,
    cfl: Option<f64>,
    init: &str,
    stride: usize,
) -> PyResult<PyRunResult> {
    let tc = make_test_case(CaseId::parse(case).map_err(py_err)?, None).map_err(py_err)?;
    let family = parse_space(space).map_err(py_err)?;
    let flux = FluxFamily::parse(flux).map_err(py_err)?;
    let mut cfg = RunConfig::new(tc, degree, family, flux);
    if let Some(t) = t_final {
        cfg.t_final = t;
    }
    if let Some(o) = rk_order {
        cfg.integrator.order = o;
    }
    if let Some(c) = cfl {
        cfg.integrator.cfl = c;
    }
    cfg.init = match init {
        "l2" => InitKind::L2Projection,
        "divfree" => InitKind::DivergenceFree,
        other => return Err(PyValueError::new_err(format!("unknown init `{other}`"))),
    };
    cfg.probes.stride = stride;
    let m = mesh.inner.clone();
    let r = py.detach(move || run_case(&cfg, m)).map_err(py_err)?;
    Ok(PyRunResult {
        steps: r.steps,
        dt: r.dt,
        times: r.times,
        drift: r.drift,
        energy: r.energy,
        errors: r.errors.into_iter().collect(),
        vector_coeffs: r.state.vector.coeffs,
    })
}

type CheckRow = (String, usize, f64, f64, bool);

/// Operator invariants as `(name, degree, residual, tolerance, passed)`.
#[pyfunction]
#[pyo3(signature = (mesh, degrees=vec![0, 1, 2], seed=42))]
fn properties(py: Python<'_>, mesh: &PyMesh, degrees: Vec<usize>, seed: u64) -> PyResult<Vec<CheckRow>> {
    let m = mesh.inner.clone();
    let checks = py.detach(move || property_suite(m, &degrees, seed)).map_err(py_err)?;
    Ok(checks.into_iter().map(|c| (c.name, c.degree, c.residual, c.tolerance, c.passed)).collect())
}

/// Betti numbers `(b0, b1, b2)` of the discrete complex on a tiny mesh.
#[pyfunction]
fn betti_numbers(mesh: &PyMesh, degree: usize) -> PyResult<(usize, usize, usize)> {
    let cx = DiscreteComplex::new(mesh.inner.clone(), degree).map_err(py_err)?;
    let r = cohomology_report(&cx).map_err(py_err)?;
    Ok((r.b0, r.b1, r.b2))
}

/// Pairwise rates and least-squares slope for one error sequence.
#[pyfunction]
fn convergence_rates(hs: Vec<f64>, errors: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let rows: Vec<Vec<f64>> = errors.into_iter().map(|e| vec![e]).collect();
    let t = ConvergenceTable::new(vec!["e".into()], &hs, &rows).map_err(py_err)?;
    let rates = t.rows.iter().filter_map(|r| r.rates[0]).collect();
    Ok((rates, t.slopes[0]))
}

#[pymodule]
pub fn dgcomplex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(properties, m)?)?;
    m.add_function(wrap_pyfunction!(betti_numbers, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_rates, m)?)?;
    Ok(())
}
