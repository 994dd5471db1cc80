//! L2 errors, constraint drift, discrete energy and convergence tables.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::operators::{adjoint_grad, adjoint_perp, cell_values};
use crate::spaces::{Field, FiniteElementSpace};

/// Which adjoint quantity a scheme preserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    /// Adjoint rotated gradient, preserved by the wave schemes.
    AdjointCurl,
    /// Adjoint gradient, preserved by the Maxwell and induction schemes.
    AdjointDiv,
}

/// Per-component L2 errors of a field against an exact function, using the
/// mesh quadrature. Scalar fields report their error in component 0.
pub fn l2_error_components<F>(field: &Field, exact: F) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    let sp = &field.space;
    let quad = &sp.quadrature;
    let vector = sp.family.is_vector();
    let sums = (0..sp.mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let vals = cell_values(field, c);
            let mut acc = [0.0; 2];
            for (v, q) in vals.iter().zip(quad.cell_points(c)) {
                let ex = exact(quad.points[q].x);
                let w = quad.weights[q];
                let d0 = v.value[0] - ex[0];
                acc[0] += w * d0 * d0;
                if vector {
                    let d1 = v.value[1] - ex[1];
                    acc[1] += w * d1 * d1;
                }
            }
            acc
        })
        .reduce(|| [0.0; 2], |a, b| [a[0] + b[0], a[1] + b[1]]);
    if sums.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite L2 error"));
    }
    Ok([sums[0].sqrt(), sums[1].sqrt()])
}

/// L2 error of a field: the norm of all components together.
pub fn l2_error<F>(field: &Field, exact: F) -> Result<f64>
where
    F: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    let e = l2_error_components(field, exact)?;
    Ok(e[0].hypot(e[1]))
}

/// L2 norm of a field.
pub fn l2_norm(field: &Field) -> Result<f64> {
    l2_error(field, |_| [0.0, 0.0])
}

/// Norm in the potential space of the difference of the preserved adjoint
/// quantity between `u` and `u0`.
pub fn constraint_drift(u: &Field, u0: &Field, kind: DriftKind, potentials: &Arc<FiniteElementSpace>) -> Result<f64> {
    if !Arc::ptr_eq(&u.space, &u0.space) {
        return Err(Error::InvalidArgument("drift fields live in different spaces".into()));
    }
    let coeffs: Vec<f64> = u.coeffs.iter().zip(&u0.coeffs).map(|(a, b)| a - b).collect();
    let diff = Field::new(&u.space, coeffs)?;
    let a = match kind {
        DriftKind::AdjointCurl => adjoint_perp(&diff, potentials)?,
        DriftKind::AdjointDiv => adjoint_grad(&diff, potentials)?,
    };
    Ok(potentials.mass()?.inner(&a.coeffs, &a.coeffs).max(0.0).sqrt())
}

/// Mass-norm norm of the adjoint quantity of a single field.
pub fn adjoint_norm(u: &Field, kind: DriftKind, potentials: &Arc<FiniteElementSpace>) -> Result<f64> {
    let a = match kind {
        DriftKind::AdjointCurl => adjoint_perp(u, potentials)?,
        DriftKind::AdjointDiv => adjoint_grad(u, potentials)?,
    };
    Ok(potentials.mass()?.inner(&a.coeffs, &a.coeffs).max(0.0).sqrt())
}

/// Discrete energy `c^T M c / 2`.
pub fn energy(u: &Field) -> Result<f64> {
    Ok(0.5 * u.space.mass()?.inner(&u.coeffs, &u.coeffs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub errors: Vec<f64>,
    /// Rate against the previous row; `None` on the first row.
    pub rates: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub variables: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log(error) against log(h), per variable.
    pub slopes: Vec<f64>,
}

impl ConvergenceTable {
    /// Builds the table from per-mesh error lists sorted by decreasing `h`.
    pub fn new(variables: Vec<String>, hs: &[f64], errors: &[Vec<f64>]) -> Result<ConvergenceTable> {
        if hs.len() < 2 || hs.len() != errors.len() {
            return Err(invalid("a convergence table needs at least two meshes with matching error lists"));
        }
        if hs.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("mesh sizes must be strictly decreasing"));
        }
        let nv = variables.len();
        if errors.iter().any(|e| e.len() != nv) {
            return Err(invalid("every mesh needs one error per variable"));
        }
        let rows = (0..hs.len())
            .map(|i| ConvergenceRow {
                h: hs[i],
                errors: errors[i].clone(),
                rates: (0..nv)
                    .map(|v| (i > 0).then(|| (errors[i - 1][v] / errors[i][v]).ln() / (hs[i - 1] / hs[i]).ln()))
                    .collect(),
            })
            .collect();
        let slopes = (0..nv)
            .map(|v| {
                let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
                let ys: Vec<f64> = errors.iter().map(|e| e[v].ln()).collect();
                least_squares_slope(&xs, &ys)
            })
            .collect();
        Ok(ConvergenceTable { variables, rows, slopes })
    }

    pub fn last_rate(&self, variable: usize) -> f64 {
        self.rows.last().and_then(|r| r.rates[variable]).unwrap_or(f64::NAN)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h");
        for v in &self.variables {
            s.push_str(&format!(",err_{v},rate_{v}"));
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{:e}", r.h));
            for (e, rate) in r.errors.iter().zip(&r.rates) {
                match rate {
                    Some(x) => s.push_str(&format!(",{e:e},{x:.4}")),
                    None => s.push_str(&format!(",{e:e},")),
                }
            }
            s.push('\n');
        }
        s.push_str("slope");
        for sl in &self.slopes {
            s.push_str(&format!(",,{sl:.4}"));
        }
        s.push('\n');
        s
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cartesian;
    use crate::operators::l2_project;
    use crate::spaces::DiscreteComplex;

    fn complex(k: usize) -> DiscreteComplex {
        DiscreteComplex::new(Arc::new(generate_cartesian(4, 4, 1.0, 1.0).unwrap()), k).unwrap()
    }

    #[test]
    fn rate_of_quartered_error_is_two() {
        let t = ConvergenceTable::new(vec!["e".into()], &[0.1, 0.05], &[vec![1e-2], vec![2.5e-3]]).unwrap();
        assert!((t.last_rate(0) - 2.0).abs() < 1e-12);
        assert!((t.slopes[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_needs_two_decreasing_meshes() {
        assert!(ConvergenceTable::new(vec!["e".into()], &[0.1], &[vec![1e-2]]).is_err());
        assert!(ConvergenceTable::new(vec!["e".into()], &[0.05, 0.1], &[vec![1e-2], vec![1e-3]]).is_err());
    }

    #[test]
    fn energy_of_unit_constant_is_half() {
        let dc = complex(1);
        let u = l2_project(&dc.curl, |_| [1.0, 0.0]).unwrap();
        assert!((energy(&u).unwrap() - 0.5).abs() < 1e-12);
        let u2 = Field::new(&dc.curl, u.coeffs.iter().map(|c| 2.0 * c).collect()).unwrap();
        assert!((energy(&u2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_error_and_drift() {
        let dc = complex(0);
        let u = Field::zeros(&dc.div);
        assert_eq!(l2_error(&u, |_| [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(constraint_drift(&u, &u, DriftKind::AdjointCurl, &dc.potentials).unwrap(), 0.0);
    }

    #[test]
    fn projection_beats_perturbed_field() {
        let dc = complex(1);
        let f = |x: [f64; 2]| {
            let a = 2.0 * std::f64::consts::PI;
            [(a * x[0]).sin(), (a * x[1]).cos()]
        };
        let u = l2_project(&dc.tensor, f).unwrap();
        let e = l2_error(&u, f).unwrap();
        let mut c = u.coeffs.clone();
        c[3] += 1e-3;
        let e2 = l2_error(&Field::new(&dc.tensor, c).unwrap(), f).unwrap();
        assert!(e < e2);
    }
}
