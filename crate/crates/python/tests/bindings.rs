use pyo3::prelude::*;
use pyo3::types::PyModule;

fn with_module<F: FnOnce(&Bound<'_, PyModule>) -> PyResult<()>>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "dgcomplex_py").unwrap();
        dgcomplex_py::dgcomplex_py(&m).unwrap();
        f(&m).unwrap();
    });
}

#[test]
fn mesh_round_trips_through_text() {
    with_module(|m| {
        let mesh = m.getattr("Mesh")?.call1(("perturbed", 5))?;
        assert_eq!(mesh.getattr("n_cells")?.extract::<usize>()?, 25);
        assert!(mesh.call_method0("validate")?.extract::<bool>()?);
        let text: String = mesh.call_method0("to_text")?.extract()?;
        let again = m.getattr("Mesh")?.call_method1("from_text", (text,))?;
        assert_eq!(again.getattr("n_sides")?.extract::<usize>()?, mesh.getattr("n_sides")?.extract::<usize>()?);
        Ok(())
    });
}

#[test]
fn run_reports_preserved_constraint() {
    with_module(|m| {
        let mesh = m.getattr("Mesh")?.call1(("triangles", 3))?;
        let kw = pyo3::types::PyDict::new(m.py());
        kw.set_item("t_final", 0.1)?;
        let r = m.getattr("run")?.call(("wave_stationary", mesh, 1, "dBdiv", "godunov"), Some(&kw))?;
        assert!(r.getattr("steps")?.extract::<usize>()? > 0);
        assert!(r.call_method0("max_drift")?.extract::<f64>()? <= 1e-11);
        Ok(())
    });
}

#[test]
fn invalid_arguments_raise_value_error() {
    with_module(|m| {
        let py = m.py();
        let err = m.getattr("Mesh")?.call1(("hexagons", 4)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let mesh = m.getattr("Mesh")?.call1(("cartesian", 4))?;
        let err = m.getattr("run")?.call1(("maxwell_stationary", mesh, 3, "dBcurl", "godunov")).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        Ok(())
    });
}

#[test]
fn betti_numbers_of_the_torus() {
    with_module(|m| {
        let mesh = m.getattr("Mesh")?.call1(("cartesian", 2))?;
        let b: (usize, usize, usize) = m.getattr("betti_numbers")?.call1((mesh, 0))?.extract()?;
        assert_eq!(b, (1, 2, 1));
        Ok(())
    });
}
