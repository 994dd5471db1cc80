//! Cell maps, per-point Jacobian data and the pullbacks applied to reference
//! bases.

use crate::error::Result;
use crate::mesh::{Cell, CellKind, Mesh};
use crate::quadrature::{square_rule, triangle_rule, unit_interval_rule, QuadratureRule};

use super::poly::{edge_point, reference_area};

/// Jacobian data of a cell map at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub x: [f64; 2],
    /// `jac[i][j] = dx_i / dxhat_j`
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl PointGeometry {
    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let j = &self.jac;
        let d = self.det;
        [[j[1][1] / d, -j[0][1] / d], [-j[1][0] / d, j[0][0] / d]]
    }
}

/// Per-cell constants of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFrame {
    /// Mean Jacobian determinant, `area / reference area`.
    pub mean_det: f64,
    /// Bilinear coefficient `v0 - v1 + v2 - v3` (zero for affine cells).
    pub bilinear: [f64; 2],
}

impl CellFrame {
    pub fn of(cell: &Cell) -> CellFrame {
        let c = &cell.coords;
        let bilinear = match cell.kind {
            CellKind::Quad => [c[0][0] - c[1][0] + c[2][0] - c[3][0], c[0][1] - c[1][1] + c[2][1] - c[3][1]],
            CellKind::Triangle => [0.0, 0.0],
        };
        CellFrame { mean_det: cell.area / reference_area(cell.kind), bilinear }
    }

    /// Scale making the vector pullbacks the identity on squares.
    pub fn vector_scale(&self) -> f64 {
        self.mean_det.sqrt()
    }
}

/// Evaluates the cell map at reference point `p`.
pub fn map_point(cell: &Cell, p: [f64; 2]) -> PointGeometry {
    let c = &cell.coords;
    match cell.kind {
        CellKind::Triangle => {
            let a = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
            let b = [c[2][0] - c[0][0], c[2][1] - c[0][1]];
            let jac = [[a[0], b[0]], [a[1], b[1]]];
            PointGeometry {
                x: [c[0][0] + a[0] * p[0] + b[0] * p[1], c[0][1] + a[1] * p[0] + b[1] * p[1]],
                jac,
                det: jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0],
            }
        }
        CellKind::Quad => {
            let (u, v) = (p[0], p[1]);
            let n = [(1.0 - u) * (1.0 - v), u * (1.0 - v), u * v, (1.0 - u) * v];
            let du = [-(1.0 - v), 1.0 - v, v, -v];
            let dv = [-(1.0 - u), -u, u, 1.0 - u];
            let mut x = [0.0; 2];
            let mut jac = [[0.0; 2]; 2];
            for a in 0..4 {
                for i in 0..2 {
                    x[i] += n[a] * c[a][i];
                    jac[i][0] += du[a] * c[a][i];
                    jac[i][1] += dv[a] * c[a][i];
                }
            }
            PointGeometry { x, jac, det: jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0] }
        }
    }
}

/// How a reference basis is carried to a physical cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Scalar composed with the inverse map.
    Scalar,
    /// Componentwise composition.
    VectorIdentity,
    /// `s J v / det J`
    Piola,
    /// `s J^{-T} v`
    Covariant,
    /// `(mean det / det) v`, a 2-form pullback.
    Density,
}

/// Physical value, gradient, divergence and curl of a mapped function.
/// `gh[c][k]` is the derivative of reference component `c` along `xhat_k`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MappedValue {
    pub value: [f64; 2],
    /// `grad[c][m] = d value_c / d x_m`
    pub grad: [[f64; 2]; 2],
    pub div: f64,
    pub curl: f64,
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Full pullback with derivatives, including the variation of the Jacobian on
/// bilinear cells.
pub fn map_full(t: Transform, g: &PointGeometry, frame: &CellFrame, vh: [f64; 2], gh: [[f64; 2]; 2]) -> MappedValue {
    let inv = g.inverse();
    let d = g.det;
    let e = frame.bilinear;
    // dJ/dxhat_k
    let dj = [[[0.0, e[0]], [0.0, e[1]]], [[e[0], 0.0], [e[1], 0.0]]];
    let dd = [
        dj[0][0][0] * g.jac[1][1] + g.jac[0][0] * dj[0][1][1] - dj[0][0][1] * g.jac[1][0] - g.jac[0][1] * dj[0][1][0],
        dj[1][0][0] * g.jac[1][1] + g.jac[0][0] * dj[1][1][1] - dj[1][0][1] * g.jac[1][0] - g.jac[0][1] * dj[1][1][0],
    ];
    let s = frame.vector_scale();
    // Reference-coordinate derivatives of the mapped value: dv[c][k].
    let (value, dv) = match t {
        Transform::Scalar | Transform::VectorIdentity => (vh, gh),
        Transform::Density => {
            let f = frame.mean_det / d;
            let mut dv = [[0.0; 2]; 2];
            for c in 0..2 {
                for k in 0..2 {
                    dv[c][k] = f * gh[c][k] - f * vh[c] * dd[k] / d;
                }
            }
            ([f * vh[0], f * vh[1]], dv)
        }
        Transform::Piola => {
            let jv = mat_vec(&g.jac, vh);
            let mut dv = [[0.0; 2]; 2];
            for k in 0..2 {
                let djv = mat_vec(&dj[k], vh);
                let jdv = mat_vec(&g.jac, [gh[0][k], gh[1][k]]);
                for c in 0..2 {
                    dv[c][k] = s * ((djv[c] + jdv[c]) / d - jv[c] * dd[k] / (d * d));
                }
            }
            ([s * jv[0] / d, s * jv[1] / d], dv)
        }
        Transform::Covariant => {
            let kt = [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]];
            let kv = mat_vec(&kt, vh);
            let mut dv = [[0.0; 2]; 2];
            for k in 0..2 {
                // d(J^{-T}) = -J^{-T} (dJ)^T J^{-T}
                let djt = [[dj[k][0][0], dj[k][1][0]], [dj[k][0][1], dj[k][1][1]]];
                let a = mat_vec(&kt, mat_vec(&djt, kv));
                let b = mat_vec(&kt, [gh[0][k], gh[1][k]]);
                for c in 0..2 {
                    dv[c][k] = s * (b[c] - a[c]);
                }
            }
            ([s * kv[0], s * kv[1]], dv)
        }
    };
    let mut grad = [[0.0; 2]; 2];
    for c in 0..2 {
        for m in 0..2 {
            grad[c][m] = dv[c][0] * inv[0][m] + dv[c][1] * inv[1][m];
        }
    }
    let mut out = MappedValue { value, grad, div: grad[0][0] + grad[1][1], curl: grad[1][0] - grad[0][1] };
    // Exact identities for the natural operator of each pullback.
    match t {
        Transform::Piola => out.div = s * (gh[0][0] + gh[1][1]) / d,
        Transform::Covariant => out.curl = s * (gh[1][0] - gh[0][1]) / d,
        _ => {}
    }
    out
}

/// Quadrature orders used for all assembly on a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureOrders {
    pub quad_points: usize,
    pub tri_degree: usize,
    pub side_points: usize,
}

impl QuadratureOrders {
    pub fn for_degree(k: usize) -> QuadratureOrders {
        QuadratureOrders { quad_points: k + 3, tri_degree: 2 * k + 4, side_points: k + 3 }
    }
}

/// Quadrature points of every cell and side with their geometric data.
#[derive(Debug, Clone)]
pub struct MeshQuadrature {
    pub orders: QuadratureOrders,
    pub quad_rule: QuadratureRule,
    pub tri_rule: QuadratureRule,
    /// Side parameters in `[0, 1]` and weights summing to 1.
    pub side_t: Vec<f64>,
    pub side_w: Vec<f64>,
    pub frames: Vec<CellFrame>,
    /// Offsets of each cell's points; length `n_cells + 1`.
    pub cell_start: Vec<usize>,
    pub points: Vec<PointGeometry>,
    /// Quadrature weight times Jacobian determinant.
    pub weights: Vec<f64>,
    /// Per side and point: geometry in the left and right cells.
    pub side_left: Vec<PointGeometry>,
    pub side_right: Vec<PointGeometry>,
    /// Quadrature weight times side length.
    pub side_weights: Vec<f64>,
}

impl MeshQuadrature {
    pub fn new(mesh: &Mesh, orders: QuadratureOrders) -> Result<MeshQuadrature> {
        let quad_rule = square_rule(orders.quad_points)?;
        let tri_rule = triangle_rule(orders.tri_degree)?;
        let (side_t, side_w) = unit_interval_rule(orders.side_points)?;
        let mut cell_start = Vec::with_capacity(mesh.n_cells() + 1);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut frames = Vec::with_capacity(mesh.n_cells());
        cell_start.push(0);
        for cell in &mesh.cells {
            let rule = match cell.kind {
                CellKind::Quad => &quad_rule,
                CellKind::Triangle => &tri_rule,
            };
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let g = map_point(cell, *p);
                weights.push(w * g.det);
                points.push(g);
            }
            cell_start.push(points.len());
            frames.push(CellFrame::of(cell));
        }
        let ns = side_t.len();
        let mut side_left = Vec::with_capacity(mesh.n_sides() * ns);
        let mut side_right = Vec::with_capacity(mesh.n_sides() * ns);
        let mut side_weights = Vec::with_capacity(mesh.n_sides() * ns);
        for side in &mesh.sides {
            let lc = &mesh.cells[side.left];
            let rc = &mesh.cells[side.right];
            for (&t, &w) in side_t.iter().zip(&side_w) {
                side_left.push(map_point(lc, edge_point(lc.kind, side.left_edge, t)));
                side_right.push(map_point(rc, edge_point(rc.kind, side.right_edge, 1.0 - t)));
                side_weights.push(w * side.length);
            }
        }
        Ok(MeshQuadrature {
            orders,
            quad_rule,
            tri_rule,
            side_t,
            side_w,
            frames,
            cell_start,
            points,
            weights,
            side_left,
            side_right,
            side_weights,
        })
    }

    pub fn rule(&self, kind: CellKind) -> &QuadratureRule {
        match kind {
            CellKind::Quad => &self.quad_rule,
            CellKind::Triangle => &self.tri_rule,
        }
    }

    pub fn cell_points(&self, c: usize) -> std::ops::Range<usize> {
        self.cell_start[c]..self.cell_start[c + 1]
    }

    pub fn n_side_points(&self) -> usize {
        self.side_t.len()
    }
}
