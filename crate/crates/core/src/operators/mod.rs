//! Mass matrices, projections, the distributional divergence and curl into
//! the cell-face space, and the discrete adjoint operators.
//!
//! Every adjoint is obtained by assembling the transpose action against the
//! shared quadrature and solving with the codomain's mass operator.

mod cohomology;
mod mass;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::{Family, Field, FiniteElementSpace, MappedValue};

pub use cohomology::{cohomology_report, CohomologyReport, MAX_COHOMOLOGY_CELLS};
pub use mass::{LinearSolveSpec, MassBlock, MassOperator};

fn same_discretization(a: &FiniteElementSpace, b: &FiniteElementSpace) -> Result<()> {
    let same_mesh = Arc::ptr_eq(&a.mesh, &b.mesh) || *a.mesh == *b.mesh;
    if !same_mesh || a.quadrature.orders != b.quadrature.orders {
        return Err(Error::InvalidArgument("spaces live on different meshes or quadratures".into()));
    }
    Ok(())
}

fn require(space: &FiniteElementSpace, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what}: got a {:?} space", space.family.family)))
    }
}

fn require_vector(space: &FiniteElementSpace, what: &str) -> Result<()> {
    require(space, space.family.is_vector(), what)
}

/// Mapped values of a field at the quadrature points of cell `c`.
pub fn cell_values(field: &Field, c: usize) -> Vec<MappedValue> {
    let sp = &field.space;
    let n = sp.local_dim(c);
    let nq = sp.quadrature.cell_points(c).len();
    let dofs: Vec<f64> = (0..n).map(|i| field.coeffs[sp.global_dof(c, i)]).collect();
    (0..nq)
        .map(|q| {
            let mut out = MappedValue::default();
            for (i, &a) in dofs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let m = sp.cell_point(c, q, i);
                accumulate(&mut out, a, &m);
            }
            out
        })
        .collect()
}

/// Mapped values of a field at the quadrature points of side `s`, seen from
/// the left (`right = false`) or right cell.
pub fn side_values(field: &Field, s: usize, right: bool) -> Vec<MappedValue> {
    let sp = &field.space;
    let side = &sp.mesh.sides[s];
    let c = if right { side.right } else { side.left };
    let n = sp.local_dim(c);
    let dofs: Vec<f64> = (0..n).map(|i| field.coeffs[sp.global_dof(c, i)]).collect();
    (0..sp.quadrature.n_side_points())
        .map(|q| {
            let mut out = MappedValue::default();
            for (i, &a) in dofs.iter().enumerate() {
                let m = sp.side_point(s, q, right, i);
                accumulate(&mut out, a, &m);
            }
            out
        })
        .collect()
}

fn accumulate(out: &mut MappedValue, a: f64, m: &MappedValue) {
    for k in 0..2 {
        out.value[k] += a * m.value[k];
        for l in 0..2 {
            out.grad[k][l] += a * m.grad[k][l];
        }
    }
    out.div += a * m.div;
    out.curl += a * m.curl;
}

/// Values of the side block of a cell-face field at the side quadrature points.
fn cellface_side_values(f: &Field, s: usize) -> Vec<f64> {
    let sp = &f.space;
    let r = sp.side_range(s).unwrap();
    sp.quadrature
        .side_t
        .iter()
        .map(|&t| sp.side_basis(t).iter().zip(&f.coeffs[r.clone()]).map(|(b, a)| b * a).sum())
        .collect()
}

/// Weights applied to each test function at a cell point: value, divergence
/// and curl.
#[derive(Debug, Clone, Copy, Default)]
struct CellLoad {
    value: [f64; 2],
    div: f64,
    curl: f64,
}

/// Assembles `r_i = sum_cells int (a . v_i + b div v_i + c curl v_i)
/// + sum_sides int (l . v_i^L + r . v_i^R)` for a discontinuous space.
fn assemble_rhs<F, G>(space: &FiniteElementSpace, cell_load: F, side_load: Option<G>) -> Vec<f64>
where
    F: Fn(usize, usize, [f64; 2]) -> CellLoad + Sync,
    G: Fn(usize, usize) -> ([f64; 2], [f64; 2]) + Sync,
{
    let mesh = &space.mesh;
    let quad = &space.quadrature;
    let locals: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let n = space.local_dim(c);
            let mut r = vec![0.0; n];
            for (q, p) in quad.cell_points(c).enumerate() {
                let load = cell_load(c, q, mesh.wrap(quad.points[p].x));
                let w = quad.weights[p];
                for (i, ri) in r.iter_mut().enumerate() {
                    let m = space.cell_point(c, q, i);
                    *ri += w
                        * (load.value[0] * m.value[0]
                            + load.value[1] * m.value[1]
                            + load.div * m.div
                            + load.curl * m.curl);
                }
            }
            r
        })
        .collect();
    let mut out = vec![0.0; space.ndofs()];
    for (c, r) in locals.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            out[space.global_dof(c, i)] += v;
        }
    }
    if let Some(side_load) = side_load {
        let nq = quad.n_side_points();
        let sides: Vec<(Vec<f64>, Vec<f64>)> = (0..mesh.n_sides())
            .into_par_iter()
            .map(|s| {
                let side = &mesh.sides[s];
                let mut l = vec![0.0; space.local_dim(side.left)];
                let mut r = vec![0.0; space.local_dim(side.right)];
                for q in 0..nq {
                    let (al, ar) = side_load(s, q);
                    let w = quad.side_weights[s * nq + q];
                    for (i, li) in l.iter_mut().enumerate() {
                        let m = space.side_point(s, q, false, i);
                        *li += w * (al[0] * m.value[0] + al[1] * m.value[1]);
                    }
                    for (i, ri) in r.iter_mut().enumerate() {
                        let m = space.side_point(s, q, true, i);
                        *ri += w * (ar[0] * m.value[0] + ar[1] * m.value[1]);
                    }
                }
                (l, r)
            })
            .collect();
        for (s, (l, r)) in sides.iter().enumerate() {
            let side = &mesh.sides[s];
            for (i, v) in l.iter().enumerate() {
                out[space.global_dof(side.left, i)] += v;
            }
            for (i, v) in r.iter().enumerate() {
                out[space.global_dof(side.right, i)] += v;
            }
        }
    }
    out
}

type NoSides = fn(usize, usize) -> ([f64; 2], [f64; 2]);

/// Scalar fields use component 0 of `f`.
pub fn l2_project<F>(space: &Arc<FiniteElementSpace>, f: F) -> Result<Field>
where
    F: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    if space.family.family == Family::CellFace {
        return cellface_project(space, |x| f(x)[0]);
    }
    let rhs = assemble_rhs(space, |_, _, x| CellLoad { value: f(x), ..Default::default() }, None::<NoSides>);
    Field::new(space, space.mass()?.solve(&rhs)?)
}

pub fn l2_project_scalar<F>(space: &Arc<FiniteElementSpace>, f: F) -> Result<Field>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    l2_project(space, |x| [f(x), 0.0])
}

/// Independent L2 projections of `g` on every cell and of its trace on every
/// side.
pub fn cellface_project<F>(space: &Arc<FiniteElementSpace>, g: F) -> Result<Field>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    let mesh = space.mesh.clone();
    let quad = space.quadrature.clone();
    cellface_project_with(space, |c, q| g(mesh.wrap(quad.points[quad.cell_start[c] + q].x)), |s, q| {
        g(mesh.wrap(mesh.sides[s].point(quad.side_t[q])))
    })
}

/// Cell-face projection of a scalar field, using its left trace on sides.
pub fn cellface_project_field(space: &Arc<FiniteElementSpace>, g: &Field) -> Result<Field> {
    require(&g.space, !g.space.family.is_vector(), "cellface_project_field needs a scalar field")?;
    same_discretization(&g.space, space)?;
    let n = space.mesh.n_cells();
    let cells: Vec<Vec<MappedValue>> = (0..n).into_par_iter().map(|c| cell_values(g, c)).collect();
    let sides: Vec<Vec<MappedValue>> =
        (0..space.mesh.n_sides()).into_par_iter().map(|s| side_values(g, s, false)).collect();
    cellface_project_with(space, |c, q| cells[c][q].value[0], |s, q| sides[s][q].value[0])
}

fn cellface_project_with<C, S>(space: &Arc<FiniteElementSpace>, cell: C, side: S) -> Result<Field>
where
    C: Fn(usize, usize) -> f64 + Sync,
    S: Fn(usize, usize) -> f64 + Sync,
{
    require(space, space.family.family == Family::CellFace, "cellface_project needs a cell-face space")?;
    let mesh = &space.mesh;
    let quad = &space.quadrature;
    let mut rhs = assemble_rhs(space, |c, q, _| CellLoad { value: [cell(c, q), 0.0], ..Default::default() }, None::<NoSides>);
    let nq = quad.n_side_points();
    for s in 0..mesh.n_sides() {
        let r = space.side_range(s).unwrap();
        for (q, &t) in quad.side_t.iter().enumerate() {
            let w = quad.side_weights[s * nq + q];
            let gx = side(s, q);
            for (j, b) in space.side_basis(t).into_iter().enumerate() {
                rhs[r.start + j] += w * gx * b;
            }
        }
    }
    Field::new(space, space.mass()?.solve(&rhs)?)
}

fn check_cellface(cf: &FiniteElementSpace) -> Result<()> {
    require(cf, cf.family.family == Family::CellFace, "codomain must be a cell-face space")
}

/// Distributional operator into the cell-face space with cell part
/// `cell(u)` and side part `side(u_L, u_R, n)`.
fn distributional<C, S>(u: &Field, cf: &Arc<FiniteElementSpace>, cell: C, side_part: S) -> Result<Field>
where
    C: Fn(&MappedValue) -> f64 + Sync,
    S: Fn(&MappedValue, &MappedValue, [f64; 2]) -> f64 + Sync,
{
    check_cellface(cf)?;
    same_discretization(&u.space, cf)?;
    let mesh = &cf.mesh;
    let quad = &cf.quadrature;
    let cell_vals: Vec<Vec<MappedValue>> = (0..mesh.n_cells()).into_par_iter().map(|c| cell_values(u, c)).collect();
    let mut rhs = assemble_rhs(
        cf,
        |c, q, _| CellLoad { value: [cell(&cell_vals[c][q]), 0.0], ..Default::default() },
        None::<NoSides>,
    );
    let nq = quad.n_side_points();
    let side_rhs: Vec<Vec<f64>> = (0..mesh.n_sides())
        .into_par_iter()
        .map(|s| {
            let l = side_values(u, s, false);
            let r = side_values(u, s, true);
            let n = mesh.sides[s].normal;
            let mut out = vec![0.0; cf.side_range(s).unwrap().len()];
            for (q, &t) in quad.side_t.iter().enumerate() {
                let w = quad.side_weights[s * nq + q] * side_part(&l[q], &r[q], n);
                for (j, b) in cf.side_basis(t).into_iter().enumerate() {
                    out[j] += w * b;
                }
            }
            out
        })
        .collect();
    for (s, v) in side_rhs.iter().enumerate() {
        let r = cf.side_range(s).unwrap();
        rhs[r].copy_from_slice(v);
    }
    Field::new(cf, cf.mass()?.solve(&rhs)?)
}

/// Cell part `div u`, side part `-Jump(u) . n`.
pub fn dist_div(u: &Field, cf: &Arc<FiniteElementSpace>) -> Result<Field> {
    require_vector(&u.space, "dist_div needs a vector field")?;
    distributional(u, cf, |m| m.div, |l, r, n| -((l.value[0] - r.value[0]) * n[0] + (l.value[1] - r.value[1]) * n[1]))
}

/// Cell part `curl u`, side part `Jump(u_perp) . n`.
pub fn dist_curl(u: &Field, cf: &Arc<FiniteElementSpace>) -> Result<Field> {
    require_vector(&u.space, "dist_curl needs a vector field")?;
    distributional(u, cf, |m| m.curl, |l, r, n| {
        let j = [l.value[0] - r.value[0], l.value[1] - r.value[1]];
        -j[1] * n[0] + j[0] * n[1]
    })
}

/// Right-hand side `B^T u` of the adjoint into the potentials, with test
/// gradients rotated when `perp` is set.
fn potential_load(u: &Field, a: &FiniteElementSpace, perp: bool) -> Result<Vec<f64>> {
    require(a, a.family.family == Family::ContinuousScalar, "codomain must be the continuous space")?;
    require_vector(&u.space, "adjoint needs a vector field")?;
    same_discretization(&u.space, a)?;
    let mesh = &a.mesh;
    let quad = &a.quadrature;
    let locals: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let vals = cell_values(u, c);
            let n = a.local_dim(c);
            let mut r = vec![0.0; n];
            for (q, p) in quad.cell_points(c).enumerate() {
                let w = quad.weights[p];
                let v = vals[q].value;
                // u . grad(f), or u . grad_perp(f) = grad(f) . (u_y, -u_x)
                let b = if perp { [v[1], -v[0]] } else { v };
                for (i, ri) in r.iter_mut().enumerate() {
                    let g = a.cell_point(c, q, i).grad[0];
                    *ri += w * (b[0] * g[0] + b[1] * g[1]);
                }
            }
            r
        })
        .collect();
    let mut out = vec![0.0; a.ndofs()];
    for (c, r) in locals.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            out[a.global_dof(c, i)] += v;
        }
    }
    Ok(out)
}

/// `<adjoint_grad(u), f>_A = <u, grad f>` for every `f` in the continuous space.
pub fn adjoint_grad(u: &Field, a: &Arc<FiniteElementSpace>) -> Result<Field> {
    let rhs = potential_load(u, a, false)?;
    Field::new(a, a.mass()?.solve(&rhs)?)
}

/// `<adjoint_perp(u), f>_A = <u, grad_perp f>`.
pub fn adjoint_perp(u: &Field, a: &Arc<FiniteElementSpace>) -> Result<Field> {
    let rhs = potential_load(u, a, true)?;
    Field::new(a, a.mass()?.solve(&rhs)?)
}

fn adjoint_distributional(f: &Field, v: &Arc<FiniteElementSpace>, curl: bool) -> Result<Vec<f64>> {
    check_cellface(&f.space)?;
    require_vector(v, "adjoint codomain must be a vector space")?;
    same_discretization(&f.space, v)?;
    let mesh = &v.mesh;
    let cell_f: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| cell_values(f, c).iter().map(|m| m.value[0]).collect())
        .collect();
    let side_f: Vec<Vec<f64>> = (0..mesh.n_sides()).into_par_iter().map(|s| cellface_side_values(f, s)).collect();
    let rhs = assemble_rhs(
        v,
        |c, q, _| {
            let fc = cell_f[c][q];
            if curl {
                CellLoad { curl: fc, ..Default::default() }
            } else {
                CellLoad { div: fc, ..Default::default() }
            }
        },
        Some(|s: usize, q: usize| {
            let n = mesh.sides[s].normal;
            let fs = side_f[s][q];
            // -fs Jump(v . n) for the divergence, fs Jump(v_perp . n) for the curl.
            let a = if curl { [fs * n[1], -fs * n[0]] } else { [-fs * n[0], -fs * n[1]] };
            (a, [-a[0], -a[1]])
        }),
    );
    Ok(rhs)
}

/// `<adjoint_dist_div(f), v> = <f, dist_div(v)>_C`.
pub fn adjoint_dist_div(f: &Field, v: &Arc<FiniteElementSpace>) -> Result<Field> {
    let rhs = adjoint_distributional(f, v, false)?;
    Field::new(v, v.mass()?.solve(&rhs)?)
}

/// `<adjoint_dist_curl(f), v> = <f, dist_curl(v)>_C`.
pub fn adjoint_dist_curl(f: &Field, v: &Arc<FiniteElementSpace>) -> Result<Field> {
    let rhs = adjoint_distributional(f, v, true)?;
    Field::new(v, v.mass()?.solve(&rhs)?)
}

/// Initial vector field `-adjoint_dist_curl(cellface_project(f0))`, which
/// lies in the kernel of `adjoint_grad`.
pub fn divfree_init<F>(f0: F, curl_space: &Arc<FiniteElementSpace>, cf: &Arc<FiniteElementSpace>) -> Result<Field>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    let fh = cellface_project(cf, f0)?;
    let mut u = adjoint_dist_curl(&fh, curl_space)?;
    u.coeffs.iter_mut().for_each(|c| *c = -*c);
    Ok(u)
}

fn gradient_field(f: &Field, v: &Arc<FiniteElementSpace>, perp: bool) -> Result<Field> {
    require(&f.space, f.space.family.family == Family::ContinuousScalar, "potential must be continuous")?;
    require_vector(v, "codomain must be a vector space")?;
    same_discretization(&f.space, v)?;
    let mesh = &v.mesh;
    let grads: Vec<Vec<[f64; 2]>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            cell_values(f, c)
                .iter()
                .map(|m| {
                    let g = m.grad[0];
                    if perp {
                        [-g[1], g[0]]
                    } else {
                        g
                    }
                })
                .collect()
        })
        .collect();
    let rhs = assemble_rhs(v, |c, q, _| CellLoad { value: grads[c][q], ..Default::default() }, None::<NoSides>);
    Field::new(v, v.mass()?.solve(&rhs)?)
}

/// L2 projection of `grad f` onto `v`; exact when `v` contains the gradients
/// of the continuous space.
pub fn grad_apply(f: &Field, v: &Arc<FiniteElementSpace>) -> Result<Field> {
    gradient_field(f, v, false)
}

/// L2 projection of `grad_perp f = (-d_y f, d_x f)` onto `v`.
pub fn perp_apply(f: &Field, v: &Arc<FiniteElementSpace>) -> Result<Field> {
    gradient_field(f, v, true)
}

/// `<u, w>` in the L2 product of the field's space.
pub fn inner(u: &Field, w: &Field) -> Result<f64> {
    if !Arc::ptr_eq(&u.space, &w.space) {
        return Err(Error::InvalidArgument("fields live in different spaces".into()));
    }
    Ok(u.space.mass()?.inner(&u.coeffs, &w.coeffs))
}
