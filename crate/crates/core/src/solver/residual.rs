//! Semidiscrete DG residual of the three systems.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::spaces::{map_full, CellFrame, DiscreteComplex, Family, Field, FiniteElementSpace, PointGeometry, Transform};
use crate::systems::{scalar_flux, vector_flux, FluxDirection, FluxSpec, SystemDef};

/// Matrix `T` with `v = T vhat` for the pullback of a vector basis.
#[inline]
fn transform_matrix(t: Transform, g: &PointGeometry, frame: &CellFrame) -> [[f64; 2]; 2] {
    let s = frame.vector_scale();
    let j = &g.jac;
    let d = g.det;
    match t {
        Transform::Piola => [[s * j[0][0] / d, s * j[0][1] / d], [s * j[1][0] / d, s * j[1][1] / d]],
        Transform::Covariant => [[s * j[1][1] / d, -s * j[1][0] / d], [-s * j[0][1] / d, s * j[0][0] / d]],
        _ => [[1.0, 0.0], [0.0, 1.0]],
    }
}

#[inline]
fn mv(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
fn mtv(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
}

/// Physical divergence (`curl = false`) or curl of a mapped basis function.
#[inline]
fn derivative(t: Transform, curl: bool, g: &PointGeometry, frame: &CellFrame, vh: [f64; 2], gh: [[f64; 2]; 2]) -> f64 {
    match (t, curl) {
        (Transform::Piola, false) => frame.vector_scale() * (gh[0][0] + gh[1][1]) / g.det,
        (Transform::Covariant, true) => frame.vector_scale() * (gh[1][0] - gh[0][1]) / g.det,
        (Transform::VectorIdentity, _) => {
            let inv = g.inverse();
            let d = |c: usize, m: usize| gh[c][0] * inv[0][m] + gh[c][1] * inv[1][m];
            if curl {
                d(1, 0) - d(0, 1)
            } else {
                d(0, 0) + d(1, 1)
            }
        }
        _ => {
            let m = map_full(t, g, frame, vh, gh);
            if curl {
                m.curl
            } else {
                m.div
            }
        }
    }
}

/// Coefficients `a` with `derivative(vh, gh) = a[0] vh_x + a[1] vh_y +
/// a[2] gh_xx + a[3] gh_xy + a[4] gh_yx + a[5] gh_yy`; the mapped divergence
/// and curl are linear in the reference value and gradient.
fn derivative_coefficients(t: Transform, curl: bool, g: &PointGeometry, frame: &CellFrame) -> [f64; 6] {
    let mut a = [0.0; 6];
    for (m, am) in a.iter_mut().enumerate() {
        let mut vh = [0.0; 2];
        let mut gh = [[0.0; 2]; 2];
        if m < 2 {
            vh[m] = 1.0;
        } else {
            gh[(m - 2) / 2][(m - 2) % 2] = 1.0;
        }
        *am = derivative(t, curl, g, frame, vh, gh);
    }
    a
}

fn split_by_offsets<'a>(mut buf: &'a mut [f64], offsets: &[usize]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(offsets.len().saturating_sub(1));
    for w in offsets.windows(2) {
        let (a, b) = std::mem::take(&mut buf).split_at_mut(w[1] - w[0]);
        out.push(a);
        buf = b;
    }
    out
}

/// Spatial discretization of one system on a discrete complex. The state is
/// a flat vector: scalar coefficients (if any) followed by the vector ones.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub system: SystemDef,
    pub flux: FluxSpec,
    pub complex: DiscreteComplex,
    pub scalar: Option<Arc<FiniteElementSpace>>,
    pub vector: Arc<FiniteElementSpace>,
    side_lambda: Vec<f64>,
    cell_offsets: Vec<usize>,
    side_offsets: Vec<usize>,
}

impl Discretization {
    pub fn new(system: SystemDef, flux: FluxSpec, complex: DiscreteComplex, vector_family: Family) -> Result<Discretization> {
        if !matches!(vector_family, Family::VectorTensor | Family::VectorDivOptimal | Family::VectorCurlOptimal) {
            return Err(invalid(format!("{vector_family:?} cannot carry the vector unknown")));
        }
        let vector = complex.space(vector_family).clone();
        let scalar = system.has_scalar().then(|| complex.scalar.clone());
        let mesh = &complex.mesh;
        let quad = &complex.quadrature;
        let side_lambda = match system {
            SystemDef::Induction { .. } => (0..mesh.n_sides())
                .map(|s| {
                    let side = &mesh.sides[s];
                    let pts: Vec<[f64; 2]> = quad.side_t.iter().map(|&t| mesh.wrap(side.point(t))).collect();
                    system.max_speed(pts.iter())
                })
                .collect(),
            _ => vec![flux.lambda; mesh.n_sides()],
        };
        let local = |c: usize| scalar.as_ref().map_or(0, |s| s.local_dim(c)) + vector.local_dim(c);
        let mut cell_offsets = vec![0];
        for c in 0..mesh.n_cells() {
            cell_offsets.push(cell_offsets[c] + local(c));
        }
        let mut side_offsets = vec![0];
        for (s, side) in mesh.sides.iter().enumerate() {
            side_offsets.push(side_offsets[s] + local(side.left) + local(side.right));
        }
        Ok(Discretization { system, flux, complex, scalar, vector, side_lambda, cell_offsets, side_offsets })
    }

    pub fn n_scalar(&self) -> usize {
        self.scalar.as_ref().map_or(0, |s| s.ndofs())
    }

    pub fn len(&self) -> usize {
        self.n_scalar() + self.vector.ndofs()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest wave speed: `c`, or `max |b|` over the cell quadrature points.
    pub fn max_speed(&self) -> f64 {
        let mesh = &self.complex.mesh;
        let pts: Vec<[f64; 2]> = self.complex.quadrature.points.iter().map(|g| mesh.wrap(g.x)).collect();
        self.system.max_speed(pts.iter())
    }

    pub fn split<'a>(&self, y: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        y.split_at(self.n_scalar())
    }

    pub fn vector_field(&self, y: &[f64]) -> Field {
        Field { space: self.vector.clone(), coeffs: self.split(y).1.to_vec() }
    }

    pub fn scalar_field(&self, y: &[f64]) -> Option<Field> {
        self.scalar.as_ref().map(|s| Field { space: s.clone(), coeffs: self.split(y).0.to_vec() })
    }

    /// Values of `D = -adjoint_grad(u)` at every cell quadrature point.
    fn divergence_at_points(&self, u: &[f64]) -> Result<Vec<f64>> {
        let a = &self.complex.potentials;
        let quad = &self.complex.quadrature;
        let mesh = &self.complex.mesh;
        let vt = self.vector.family.transform();
        // Load <u, grad phi_j> per cell, with grad phi = J^{-T} grad phi_hat.
        let loads: Vec<Vec<f64>> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let el = a.cell_element(c);
                let vel = self.vector.cell_element(c);
                let vd = &u[self.vector.cell_range(c).unwrap()];
                let mut load = vec![0.0; el.dim()];
                for (q, p) in quad.cell_points(c).enumerate() {
                    let g = &quad.points[p];
                    let mut uh = [0.0; 2];
                    for (i, &x) in vd.iter().enumerate() {
                        let v = vel.cell.value(q, i);
                        uh[0] += x * v[0];
                        uh[1] += x * v[1];
                    }
                    let b = mv(&g.inverse(), mv(&transform_matrix(vt, g, &quad.frames[c]), uh));
                    let w = quad.weights[p];
                    for (j, l) in load.iter_mut().enumerate() {
                        let gh = el.cell.grad(q, j)[0];
                        *l += w * (b[0] * gh[0] + b[1] * gh[1]);
                    }
                }
                load
            })
            .collect();
        let mut d = vec![0.0; a.ndofs()];
        for (c, load) in loads.iter().enumerate() {
            for (j, l) in load.iter().enumerate() {
                d[a.global_dof(c, j)] += l;
            }
        }
        a.mass()?.solve_in_place(&mut d)?;
        let mut out = vec![0.0; quad.points.len()];
        for c in 0..mesh.n_cells() {
            let el = a.cell_element(c);
            for (q, p) in quad.cell_points(c).enumerate() {
                let mut v = 0.0;
                for i in 0..el.dim() {
                    v += d[a.global_dof(c, i)] * el.cell.value(q, i)[0];
                }
                out[p] = -v;
            }
        }
        Ok(out)
    }

    /// `dy/dt` for the state `y`.
    pub fn rhs(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        if y.len() != self.len() || out.len() != self.len() {
            return Err(invalid(format!("state length {} and output length {} must both be {}", y.len(), out.len(), self.len())));
        }
        let mesh = &self.complex.mesh;
        let (ys, yv) = self.split(y);
        let div_at = match self.system {
            SystemDef::Induction { .. } => Some(self.divergence_at_points(yv)?),
            _ => None,
        };
        let mut cell_buf = vec![0.0; *self.cell_offsets.last().unwrap()];
        split_by_offsets(&mut cell_buf, &self.cell_offsets)
            .into_par_iter()
            .enumerate()
            .for_each(|(c, r)| self.cell_kernel(c, ys, yv, div_at.as_deref(), r));
        let mut side_buf = vec![0.0; *self.side_offsets.last().unwrap()];
        split_by_offsets(&mut side_buf, &self.side_offsets)
            .into_par_iter()
            .enumerate()
            .for_each(|(s, r)| self.side_kernel(s, ys, yv, r));

        let ns = self.n_scalar();
        out.iter_mut().for_each(|v| *v = 0.0);
        let (out_s, out_v) = out.split_at_mut(ns);
        for c in 0..mesh.n_cells() {
            let nsl = self.scalar.as_ref().map_or(0, |s| s.local_dim(c));
            let local = &cell_buf[self.cell_offsets[c]..self.cell_offsets[c + 1]];
            let cell = &mesh.cells[c];
            let mut acc = local.to_vec();
            for (e, &s) in cell.sides.iter().enumerate() {
                let side = &mesh.sides[s];
                let base = self.side_offsets[s];
                let start = if cell.is_left[e] {
                    base
                } else {
                    base + self.cell_offsets[side.left + 1] - self.cell_offsets[side.left]
                };
                let part = &side_buf[start..start + acc.len()];
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            if let Some(sc) = &self.scalar {
                for i in 0..nsl {
                    out_s[sc.global_dof(c, i)] = acc[i];
                }
            }
            for i in nsl..acc.len() {
                out_v[self.vector.global_dof(c, i - nsl)] = acc[i];
            }
        }
        if let Some(sc) = &self.scalar {
            sc.mass()?.solve_in_place(out_s)?;
        }
        self.vector.mass()?.solve_in_place(out_v)?;
        Ok(())
    }

    fn cell_kernel(&self, c: usize, ys: &[f64], yv: &[f64], div_at: Option<&[f64]>, r: &mut [f64]) {
        let quad = &self.complex.quadrature;
        let mesh = &self.complex.mesh;
        let frame = &quad.frames[c];
        let vel = self.vector.cell_element(c);
        let vt = self.vector.family.transform();
        let nv = vel.dim();
        let vdofs = &yv[self.vector.cell_range(c).unwrap()];
        let (sel, sdofs) = match &self.scalar {
            Some(sc) => (Some(sc.cell_element(c)), &ys[sc.cell_range(c).unwrap()]),
            None => (None, &ys[0..0]),
        };
        let nsl = sdofs.len();
        let (rs, rv) = r.split_at_mut(nsl);
        let curl = self.system.direction() == FluxDirection::Tangential;
        for (q, p) in quad.cell_points(c).enumerate() {
            let g = &quad.points[p];
            let w = quad.weights[p];
            let t = transform_matrix(vt, g, frame);
            let mut uh = [0.0; 2];
            for (i, &a) in vdofs.iter().enumerate() {
                let v = vel.cell.value(q, i);
                uh[0] += a * v[0];
                uh[1] += a * v[1];
            }
            let u = mv(&t, uh);
            let mut ph = 0.0;
            if let Some(sel) = sel {
                for (j, &a) in sdofs.iter().enumerate() {
                    ph += a * sel.cell.value(q, j)[0];
                }
            }
            let x = mesh.wrap(g.x);
            let gp = self.system.potential(ph, u, x);
            let coupling = match (&self.system, div_at) {
                (SystemDef::Induction { b }, Some(d)) => {
                    let bv = b.at(x);
                    let bd = [bv[0] * d[p], bv[1] * d[p]];
                    Some(mtv(&t, bd))
                }
                _ => None,
            };
            let dc = derivative_coefficients(vt, curl, g, frame);
            let wg = w * gp;
            let mut cv = [wg * dc[0], wg * dc[1]];
            if let Some(a) = coupling {
                cv[0] -= w * a[0];
                cv[1] -= w * a[1];
            }
            let cg = [wg * dc[2], wg * dc[3], wg * dc[4], wg * dc[5]];
            for (i, ri) in rv.iter_mut().enumerate().take(nv) {
                let vh = vel.cell.value(q, i);
                let gh = vel.cell.grad(q, i);
                *ri += cv[0] * vh[0] + cv[1] * vh[1] + cg[0] * gh[0][0] + cg[1] * gh[0][1] + cg[2] * gh[1][0] + cg[3] * gh[1][1];
            }
            if let Some(sel) = sel {
                // Wave: u . grad q; Maxwell: e . grad_perp q = grad q . (e_y, -e_x).
                let b = match self.system {
                    SystemDef::Wave { .. } => u,
                    _ => [u[1], -u[0]],
                };
                let inv = g.inverse();
                let bref = mv(&inv, b);
                for j in 0..nsl {
                    let gh = sel.cell.grad(q, j)[0];
                    rs[j] += w * (bref[0] * gh[0] + bref[1] * gh[1]);
                }
            }
        }
    }

    fn side_kernel(&self, s: usize, ys: &[f64], yv: &[f64], r: &mut [f64]) {
        let mesh = &self.complex.mesh;
        let quad = &self.complex.quadrature;
        let side = &mesh.sides[s];
        let nq = quad.n_side_points();
        let vt = self.vector.family.transform();
        let dir = self.system.direction();
        let lambda = self.side_lambda[s];
        let n = side.normal;
        let cells = [side.left, side.right];
        let edges = [side.left_edge, side.right_edge];
        let locals: Vec<usize> = cells
            .iter()
            .map(|&c| self.cell_offsets[c + 1] - self.cell_offsets[c])
            .collect();
        let (rl, rr) = r.split_at_mut(locals[0]);
        let parts = [rl, rr];
        for q in 0..nq {
            let w = quad.side_weights[s * nq + q];
            let x = mesh.wrap(side.point(quad.side_t[q]));
            let mut us = [[0.0; 2]; 2];
            let mut ps = [0.0; 2];
            let mut ts = [[[0.0; 2]; 2]; 2];
            for k in 0..2 {
                let c = cells[k];
                let g = if k == 0 { &quad.side_left[s * nq + q] } else { &quad.side_right[s * nq + q] };
                ts[k] = transform_matrix(vt, g, &quad.frames[c]);
                let tab = &self.vector.cell_element(c).edges[edges[k]][k];
                let vd = &yv[self.vector.cell_range(c).unwrap()];
                let mut uh = [0.0; 2];
                for (i, &a) in vd.iter().enumerate() {
                    let v = tab.value(q, i);
                    uh[0] += a * v[0];
                    uh[1] += a * v[1];
                }
                us[k] = mv(&ts[k], uh);
                if let Some(sc) = &self.scalar {
                    let stab = &sc.cell_element(c).edges[edges[k]][k];
                    let sd = &ys[sc.cell_range(c).unwrap()];
                    ps[k] = sd.iter().enumerate().map(|(j, &a)| a * stab.value(q, j)[0]).sum();
                }
            }
            let gl = self.system.potential(ps[0], us[0], x);
            let gr = self.system.potential(ps[1], us[1], x);
            let gflux = vector_flux(self.flux.family, lambda, gl, gr, us[0], us[1], n, dir);
            let sflux = scalar_flux(&self.system, ps[0], ps[1], us[0], us[1], n);
            for k in 0..2 {
                let c = cells[k];
                let sign = if k == 0 { -w } else { w };
                let nsl = self.scalar.as_ref().map_or(0, |sc| sc.local_dim(c));
                if let Some(sc) = &self.scalar {
                    let stab = &sc.cell_element(c).edges[edges[k]][k];
                    for j in 0..nsl {
                        parts[k][j] += sign * sflux * stab.value(q, j)[0];
                    }
                }
                let tab = &self.vector.cell_element(c).edges[edges[k]][k];
                let gref = mtv(&ts[k], gflux);
                for i in 0..tab.n_basis {
                    let v = tab.value(q, i);
                    parts[k][nsl + i] += sign * (v[0] * gref[0] + v[1] * gref[1]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cartesian, generate_perturbed_quad};
    use crate::spaces::map_point;
    use crate::systems::{make_test_case, CaseId, FluxFamily};

    const TRANSFORMS: [Transform; 3] = [Transform::Piola, Transform::Covariant, Transform::VectorIdentity];

    fn sample() -> ([f64; 2], [[f64; 2]; 2]) {
        ([0.3, -1.2], [[0.7, 2.1], [-0.4, 1.3]])
    }

    #[test]
    fn shortcut_derivatives_match_the_full_map() {
        let mesh = generate_perturbed_quad(3, 3, 0.25, 9).unwrap();
        let (vh, gh) = sample();
        for cell in &mesh.cells {
            let frame = CellFrame::of(cell);
            for p in [[0.2, 0.3], [0.8, 0.5], [0.5, 0.9]] {
                let g = map_point(cell, p);
                for t in TRANSFORMS {
                    let m = map_full(t, &g, &frame, vh, gh);
                    assert!((derivative(t, false, &g, &frame, vh, gh) - m.div).abs() < 1e-10, "{t:?}");
                    assert!((derivative(t, true, &g, &frame, vh, gh) - m.curl).abs() < 1e-10, "{t:?}");
                }
            }
        }
    }

    #[test]
    fn derivative_coefficients_reproduce_the_derivative() {
        let mesh = generate_perturbed_quad(3, 3, 0.25, 4).unwrap();
        let (vh, gh) = sample();
        let cell = &mesh.cells[4];
        let frame = CellFrame::of(cell);
        let g = map_point(cell, [0.3, 0.6]);
        for t in TRANSFORMS {
            for curl in [false, true] {
                let a = derivative_coefficients(t, curl, &g, &frame);
                let v = a[0] * vh[0] + a[1] * vh[1] + a[2] * gh[0][0] + a[3] * gh[0][1] + a[4] * gh[1][0] + a[5] * gh[1][1];
                assert!((v - derivative(t, curl, &g, &frame, vh, gh)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_matrices_invert_on_a_rotated_frame() {
        // Piola and covariant maps agree up to the inverse transpose.
        let mesh = generate_perturbed_quad(2, 2, 0.2, 1).unwrap();
        let cell = &mesh.cells[0];
        let frame = CellFrame::of(cell);
        let g = map_point(cell, [0.4, 0.4]);
        let p = transform_matrix(Transform::Piola, &g, &frame);
        let c = transform_matrix(Transform::Covariant, &g, &frame);
        let s2 = frame.vector_scale().powi(2);
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| p[k][i] * c[k][j]).sum();
                let expected = if i == j { s2 / g.det } else { 0.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
        assert_eq!(transform_matrix(Transform::VectorIdentity, &g, &frame), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn offsets_split_a_buffer() {
        let mut buf = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let parts = split_by_offsets(&mut buf, &[0, 2, 2, 6]);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], &[1.0, 2.0]);
        assert!(parts[1].is_empty());
        assert_eq!(parts[2], &[3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn state_layout_puts_the_scalar_first() {
        let mesh = Arc::new(generate_cartesian(3, 3, 1.0, 1.0).unwrap());
        let tc = make_test_case(CaseId::WaveWavetrain, None).unwrap();
        let cx = DiscreteComplex::new(mesh.clone(), 1).unwrap();
        let d = Discretization::new(tc.system, FluxSpec::for_system(FluxFamily::Godunov, &tc.system), cx, Family::VectorDivOptimal).unwrap();
        assert_eq!(d.len(), d.n_scalar() + d.vector.ndofs());
        let y: Vec<f64> = (0..d.len()).map(|i| i as f64).collect();
        let (s, v) = d.split(&y);
        assert_eq!(s.len(), d.n_scalar());
        assert_eq!(v[0], d.n_scalar() as f64);

        let tc = make_test_case(CaseId::InductionRotatingLoop, None).unwrap();
        let cx = DiscreteComplex::new(mesh, 1).unwrap();
        let d = Discretization::new(tc.system, FluxSpec::for_system(FluxFamily::Godunov, &tc.system), cx, Family::VectorCurlOptimal).unwrap();
        assert_eq!(d.n_scalar(), 0);
        assert!(d.scalar_field(&vec![0.0; d.len()]).is_none());
        assert!(d.max_speed() > 0.0);
    }

    #[test]
    fn residual_length_is_checked() {
        let mesh = Arc::new(generate_cartesian(2, 2, 1.0, 1.0).unwrap());
        let tc = make_test_case(CaseId::MaxwellStationary, None).unwrap();
        let cx = DiscreteComplex::new(mesh, 0).unwrap();
        let d = Discretization::new(tc.system, FluxSpec::for_system(FluxFamily::Godunov, &tc.system), cx, Family::VectorCurlOptimal).unwrap();
        let mut out = vec![0.0; d.len()];
        assert!(d.rhs(&vec![0.0; d.len() + 1], &mut out).is_err());
    }
}
