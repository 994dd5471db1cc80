//! CSV series and legacy VTK output.

use std::fmt::Write;

use crate::operators::cell_values;
use crate::solver::{RunResult, SolverState};

fn series(header: &str, times: &[f64], values: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (t, v) in times.iter().zip(values) {
        writeln!(s, "{t:e},{v:e}").unwrap();
    }
    s
}

/// `t,drift` per recorded step.
pub fn drift_csv(r: &RunResult) -> String {
    series("t,drift", &r.times, &r.drift)
}

/// `t,energy` with the energy divided by its initial value.
pub fn energy_csv(r: &RunResult) -> String {
    series("t,energy", &r.times, &r.energy)
}

/// `variable,l2_error` at the final time.
pub fn errors_csv(r: &RunResult) -> String {
    let mut s = String::from("variable,l2_error\n");
    for (name, e) in &r.errors {
        writeln!(s, "{name},{e:e}").unwrap();
    }
    s
}

/// Legacy ASCII unstructured grid with one vertex per cell quadrature point
/// carrying the sampled fields and the owning cell index.
pub fn vtk_fields(state: &SolverState, title: &str) -> String {
    let sp = &state.vector.space;
    let mesh = &sp.mesh;
    let quad = &sp.quadrature;
    let n = quad.points.len();
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0\n{title} t={:e}\nASCII\nDATASET UNSTRUCTURED_GRID", state.time).unwrap();
    writeln!(s, "POINTS {n} double").unwrap();
    for p in &quad.points {
        let x = mesh.wrap(p.x);
        writeln!(s, "{:e} {:e} 0", x[0], x[1]).unwrap();
    }
    writeln!(s, "CELLS {n} {}", 2 * n).unwrap();
    for i in 0..n {
        writeln!(s, "1 {i}").unwrap();
    }
    writeln!(s, "CELL_TYPES {n}").unwrap();
    for _ in 0..n {
        s.push_str("1\n");
    }
    writeln!(s, "POINT_DATA {n}").unwrap();
    s.push_str("SCALARS cell int 1\nLOOKUP_TABLE default\n");
    for c in 0..mesh.n_cells() {
        for _ in quad.cell_points(c) {
            writeln!(s, "{c}").unwrap();
        }
    }
    if let Some(f) = &state.scalar {
        s.push_str("SCALARS scalar double 1\nLOOKUP_TABLE default\n");
        for c in 0..mesh.n_cells() {
            for v in cell_values(f, c) {
                writeln!(s, "{:e}", v.value[0]).unwrap();
            }
        }
    }
    s.push_str("VECTORS vector double\n");
    for c in 0..mesh.n_cells() {
        for v in cell_values(&state.vector, c) {
            writeln!(s, "{:e} {:e} 0", v.value[0], v.value[1]).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_cartesian;
    use crate::solver::{run_case, RunConfig};
    use crate::spaces::Family;
    use crate::systems::{make_test_case, CaseId, FluxFamily};

    fn result() -> RunResult {
        let tc = make_test_case(CaseId::WaveStationary, None).unwrap();
        let mut cfg = RunConfig::new(tc, 0, Family::VectorDivOptimal, FluxFamily::Godunov);
        cfg.t_final = 0.1;
        run_case(&cfg, Arc::new(generate_cartesian(3, 2, 1.0, 1.0).unwrap())).unwrap()
    }

    #[test]
    fn series_have_one_row_per_sample() {
        let r = result();
        for (csv, header) in [(drift_csv(&r), "t,drift"), (energy_csv(&r), "t,energy")] {
            let lines: Vec<&str> = csv.lines().collect();
            assert_eq!(lines[0], header);
            assert_eq!(lines.len(), r.times.len() + 1);
            assert!(lines[1..].iter().all(|l| l.split(',').all(|v| v.parse::<f64>().is_ok())));
        }
        let errors = errors_csv(&r);
        assert_eq!(errors.lines().count(), r.errors.len() + 1);
    }

    #[test]
    fn vtk_counts_match_the_quadrature() {
        let r = result();
        let vtk = vtk_fields(&r.state, "wave");
        let n = r.state.vector.space.quadrature.points.len();
        assert!(vtk.contains(&format!("POINTS {n} double")));
        assert!(vtk.contains(&format!("POINT_DATA {n}")));
        let after = vtk.split("VECTORS vector double\n").nth(1).unwrap();
        assert_eq!(after.lines().count(), n);
        let cells = vtk.split("SCALARS cell int 1\nLOOKUP_TABLE default\n").nth(1).unwrap();
        assert_eq!(cells.lines().next(), Some("0"));
    }
}
