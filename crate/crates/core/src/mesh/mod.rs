//! Periodic polygonal meshes of the torus `[0, Lx) x [0, Ly)`.
//!
//! Cells are stored by vertex index and unwrapped once at construction, so
//! every geometric quantity of a cell is computed in a single connected frame.
//! Sides carry the lattice shift between the frames of their two cells.

mod generate;
mod io;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use generate::{generate_cartesian, generate_perturbed_quad, split_into_triangles};
pub use io::{load_mesh, save_mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Triangle,
    Quad,
}

impl CellKind {
    pub fn n_vertices(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quad => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    /// Global vertex indices, counterclockwise.
    pub vertices: Vec<usize>,
    /// Unwrapped vertex coordinates in the cell's own frame.
    pub coords: Vec<[f64; 2]>,
    /// Side index of local edge `i` (from vertex `i` to vertex `i + 1`).
    pub sides: Vec<usize>,
    /// Whether the cell is the left cell of the side on local edge `i`.
    pub is_left: Vec<bool>,
    pub area: f64,
    pub centroid: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Side {
    /// Endpoint vertices, in the direction the left cell traverses them.
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: usize,
    pub left_edge: usize,
    pub right_edge: usize,
    /// Endpoints in the left cell's frame.
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Lattice wraps from the left frame to the right frame.
    pub wraps: [i32; 2],
    /// Translation taking left-frame coordinates to right-frame coordinates.
    pub shift: [f64; 2],
    /// Unit normal pointing out of the left cell.
    pub normal: [f64; 2],
    pub length: f64,
}

impl Side {
    /// Point at parameter `t` in the left cell's frame.
    pub fn point(&self, t: f64) -> [f64; 2] {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }

    pub fn tangent(&self) -> [f64; 2] {
        [-self.normal[1], self.normal[0]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub lx: f64,
    pub ly: f64,
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub sides: Vec<Side>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n_vertices: usize,
    pub n_sides: usize,
    pub n_cells: usize,
    pub euler_characteristic: i64,
    /// Number of incident cells per side, in side order.
    pub incidence: Vec<usize>,
    pub orientation_ok: bool,
    pub normals_ok: bool,
    pub min_area: f64,
    pub max_area: f64,
    pub total_area: f64,
    pub h_min: f64,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn signed_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    let mut a = 0.0;
    for i in 0..n {
        let q = p[i];
        let r = p[(i + 1) % n];
        a += q[0] * r[1] - r[0] * q[1];
    }
    0.5 * a
}

fn perimeter(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let q = p[i];
            let r = p[(i + 1) % n];
            (r[0] - q[0]).hypot(r[1] - q[1])
        })
        .sum()
}

fn centroid(p: &[[f64; 2]]) -> [f64; 2] {
    let n = p.len();
    let a = signed_area(p);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let q = p[i];
        let r = p[(i + 1) % n];
        let c = q[0] * r[1] - r[0] * q[1];
        cx += (q[0] + r[0]) * c;
        cy += (q[1] + r[1]) * c;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Chooses lattice images of the cell vertices giving the loop of minimal
/// perimeter, preferring positive orientation among equal perimeters.
fn unwrap_cell(lx: f64, ly: f64, pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = pts.len();
    let tol = 1e-9 * lx.max(ly);
    // Fast path: every edge has a unique nearest image.
    let mut out = Vec::with_capacity(n);
    out.push(pts[0]);
    let mut unique = true;
    for i in 1..=n {
        let prev = out[i - 1];
        let target = pts[i % n];
        let dx = target[0] - prev[0];
        let dy = target[1] - prev[1];
        let ax = (dx / lx).round();
        let ay = (dy / ly).round();
        let rx = dx - ax * lx;
        let ry = dy - ay * ly;
        if (rx.abs() - 0.5 * lx).abs() < tol || (ry.abs() - 0.5 * ly).abs() < tol {
            unique = false;
            break;
        }
        if i < n {
            out.push([prev[0] + rx, prev[1] + ry]);
        } else {
            let closing = [prev[0] + rx, prev[1] + ry];
            if (closing[0] - out[0][0]).abs() > tol || (closing[1] - out[0][1]).abs() > tol {
                unique = false;
            }
        }
    }
    if unique && out.len() == n {
        return out;
    }
    // Exhaustive search over neighbouring images.
    let mut best: Option<(f64, f64, Vec<[f64; 2]>)> = None;
    let combos = 9usize.pow((n - 1) as u32);
    let mut cand = vec![[0.0; 2]; n];
    cand[0] = pts[0];
    for code in 0..combos {
        let mut c = code;
        for i in 1..n {
            let s = c % 9;
            c /= 9;
            let ax = (s % 3) as f64 - 1.0;
            let ay = (s / 3) as f64 - 1.0;
            cand[i] = [pts[i][0] + ax * lx, pts[i][1] + ay * ly];
        }
        let per = perimeter(&cand);
        let area = signed_area(&cand);
        let better = match &best {
            None => true,
            Some((bp, ba, _)) => {
                per < bp - tol || ((per - bp).abs() <= tol && area > *ba + tol)
            }
        };
        if better {
            best = Some((per, area, cand.clone()));
        }
    }
    best.map(|b| b.2).unwrap_or_default()
}

type SideKey = (usize, usize, i64, i64);

impl Mesh {
    /// Builds a mesh from vertex coordinates and counterclockwise cell loops.
    /// Each cell is placed at the lattice images of minimal perimeter, which
    /// is unambiguous when cells are smaller than half the torus.
    pub fn new(lx: f64, ly: f64, vertices: Vec<[f64; 2]>, cells: Vec<Vec<usize>>) -> Result<Mesh> {
        Self::build(lx, ly, vertices, cells, None)
    }

    /// Like [`Mesh::new`] with the unwrapped coordinates of every cell given,
    /// for generators that know the lattice images of their vertices.
    pub fn with_cell_coords(
        lx: f64,
        ly: f64,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Vec<usize>>,
        coords: Vec<Vec<[f64; 2]>>,
    ) -> Result<Mesh> {
        if coords.len() != cells.len() || coords.iter().zip(&cells).any(|(p, c)| p.len() != c.len()) {
            return Err(Error::Topology("cell coordinates do not match the cell loops".into()));
        }
        Self::build(lx, ly, vertices, cells, Some(coords))
    }

    fn build(
        lx: f64,
        ly: f64,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Vec<usize>>,
        coords: Option<Vec<Vec<[f64; 2]>>>,
    ) -> Result<Mesh> {
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidArgument(format!("torus lengths must be positive, got ({lx}, {ly})")));
        }
        let vertices: Vec<[f64; 2]> = vertices
            .into_iter()
            .map(|v| [v[0].rem_euclid(lx), v[1].rem_euclid(ly)])
            .collect();
        let mut built: Vec<Cell> = Vec::with_capacity(cells.len());
        for (ci, loop_) in cells.iter().enumerate() {
            let kind = match loop_.len() {
                3 => CellKind::Triangle,
                4 => CellKind::Quad,
                n => return Err(Error::Topology(format!("cell {ci} has {n} vertices"))),
            };
            for (i, &v) in loop_.iter().enumerate() {
                if v >= vertices.len() {
                    return Err(Error::Topology(format!("cell {ci} references missing vertex {v}")));
                }
                if loop_[..i].contains(&v) {
                    return Err(Error::Topology(format!("cell {ci} repeats vertex {v}")));
                }
            }
            let coords = match &coords {
                Some(c) => c[ci].clone(),
                None => {
                    let pts: Vec<[f64; 2]> = loop_.iter().map(|&v| vertices[v]).collect();
                    unwrap_cell(lx, ly, &pts)
                }
            };
            let area = signed_area(&coords);
            if !(area > 1e-14 * lx * ly) {
                return Err(Error::InvertedCell { cell: ci });
            }
            let n = coords.len();
            built.push(Cell {
                kind,
                vertices: loop_.clone(),
                centroid: centroid(&coords),
                coords,
                sides: vec![usize::MAX; n],
                is_left: vec![false; n],
                area,
            });
        }

        // Incidences keyed by the pair of endpoint vertices and the lattice
        // offset between them, so distinct sides sharing both endpoints on
        // very coarse tori stay distinct.
        let mut incid: HashMap<SideKey, Vec<(usize, usize, bool)>> = HashMap::new();
        for (ci, cell) in built.iter().enumerate() {
            let n = cell.vertices.len();
            for e in 0..n {
                let (key, forward) = edge_key(lx, ly, &vertices, cell, e)?;
                incid.entry(key).or_default().push((ci, e, forward));
            }
        }
        for (key, list) in &incid {
            if list.len() != 2 {
                return Err(Error::Topology(format!(
                    "side between vertices {} and {} has {} incident cells",
                    key.0,
                    key.1,
                    list.len()
                )));
            }
            if list[0].2 == list[1].2 {
                return Err(Error::Topology(format!(
                    "cells {} and {} traverse their shared side in the same direction",
                    list[0].0, list[1].0
                )));
            }
            if list[0].0 == list[1].0 {
                return Err(Error::Topology(format!("cell {} is adjacent to itself", list[0].0)));
            }
        }

        let mut sides = Vec::with_capacity(incid.len());
        for ci in 0..built.len() {
            let n = built[ci].vertices.len();
            for e in 0..n {
                let (key, _) = edge_key(lx, ly, &vertices, &built[ci], e)?;
                let list = &incid[&key];
                let (other, oe) = if list[0].0 == ci && list[0].1 == e {
                    (list[1].0, list[1].1)
                } else {
                    (list[0].0, list[0].1)
                };
                if other < ci {
                    continue;
                }
                let lc = &built[ci];
                let rc = &built[other];
                let start = lc.coords[e];
                let end = lc.coords[(e + 1) % n];
                let rn = rc.vertices.len();
                let r_end = rc.coords[(oe + 1) % rn];
                let shift = [r_end[0] - start[0], r_end[1] - start[1]];
                let wraps = [(shift[0] / lx).round() as i32, (shift[1] / ly).round() as i32];
                let shift = [wraps[0] as f64 * lx, wraps[1] as f64 * ly];
                let tx = end[0] - start[0];
                let ty = end[1] - start[1];
                let length = tx.hypot(ty);
                let normal = [ty / length, -tx / length];
                let si = sides.len();
                sides.push(Side {
                    vertices: [lc.vertices[e], lc.vertices[(e + 1) % n]],
                    left: ci,
                    right: other,
                    left_edge: e,
                    right_edge: oe,
                    start,
                    end,
                    wraps,
                    shift,
                    normal,
                    length,
                });
                built[ci].sides[e] = si;
                built[ci].is_left[e] = true;
                built[other].sides[oe] = si;
                built[other].is_left[oe] = false;
            }
        }
        let mesh = Mesh { lx, ly, vertices, cells: built, sides };
        let euler = mesh.vertices.len() as i64 - mesh.sides.len() as i64 + mesh.cells.len() as i64;
        if euler != 0 {
            return Err(Error::Topology(format!("Euler characteristic is {euler}, expected 0 on a torus")));
        }
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_sides(&self) -> usize {
        self.sides.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// `sqrt` of the smallest cell area.
    pub fn h_min(&self) -> f64 {
        self.cells.iter().map(|c| c.area).fold(f64::INFINITY, f64::min).sqrt()
    }

    pub fn is_all_quads(&self) -> bool {
        self.cells.iter().all(|c| c.kind == CellKind::Quad)
    }

    pub fn is_all_triangles(&self) -> bool {
        self.cells.iter().all(|c| c.kind == CellKind::Triangle)
    }

    /// Wraps a point into the fundamental domain.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0].rem_euclid(self.lx), p[1].rem_euclid(self.ly)]
    }

    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let mut incidence = vec![0usize; self.sides.len()];
        for (ci, cell) in self.cells.iter().enumerate() {
            for (e, &s) in cell.sides.iter().enumerate() {
                match self.sides.get(s) {
                    Some(side) => {
                        incidence[s] += 1;
                        let ok = (side.left == ci && side.left_edge == e && cell.is_left[e])
                            || (side.right == ci && side.right_edge == e && !cell.is_left[e]);
                        if !ok {
                            failures.push(format!("cell {ci} edge {e} disagrees with side {s}"));
                        }
                    }
                    None => failures.push(format!("cell {ci} edge {e} has no side")),
                }
            }
        }
        for (s, &c) in incidence.iter().enumerate() {
            if c != 2 {
                failures.push(format!("side {s} has {c} incident cells"));
            }
        }
        let mut orientation_ok = true;
        for (ci, cell) in self.cells.iter().enumerate() {
            if signed_area(&cell.coords) <= 0.0 {
                orientation_ok = false;
                failures.push(format!("cell {ci} is not counterclockwise"));
            }
        }
        let mut normals_ok = true;
        for (s, side) in self.sides.iter().enumerate() {
            let n = side.normal;
            let t = [side.end[0] - side.start[0], side.end[1] - side.start[1]];
            let unit = ((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() <= 1e-14;
            let orth = (n[0] * t[0] + n[1] * t[1]).abs() <= 1e-14 * side.length.max(1.0);
            let cl = self.cells[side.left].centroid;
            let cr = self.cells[side.right].centroid;
            let d = [cr[0] - side.shift[0] - cl[0], cr[1] - side.shift[1] - cl[1]];
            let outward = n[0] * d[0] + n[1] * d[1] > 0.0;
            if !(unit && orth && outward) {
                normals_ok = false;
                failures.push(format!("side {s} normal check failed"));
            }
            if side.left >= side.right {
                failures.push(format!("side {s} left cell is not the smaller index"));
            }
        }
        let euler = self.vertices.len() as i64 - self.sides.len() as i64 + self.cells.len() as i64;
        if euler != 0 {
            failures.push(format!("Euler characteristic {euler}"));
        }
        let min_area = self.cells.iter().map(|c| c.area).fold(f64::INFINITY, f64::min);
        let max_area = self.cells.iter().map(|c| c.area).fold(0.0, f64::max);
        let total_area: f64 = self.cells.iter().map(|c| c.area).sum();
        if (total_area - self.lx * self.ly).abs() > 1e-12 * self.lx * self.ly {
            failures.push(format!("total area {total_area} differs from the torus area"));
        }
        ValidationReport {
            n_vertices: self.vertices.len(),
            n_sides: self.sides.len(),
            n_cells: self.cells.len(),
            euler_characteristic: euler,
            incidence,
            orientation_ok,
            normals_ok,
            min_area,
            max_area,
            total_area,
            h_min: min_area.sqrt(),
            failures,
        }
    }
}

fn edge_key(lx: f64, ly: f64, vertices: &[[f64; 2]], cell: &Cell, e: usize) -> Result<(SideKey, bool)> {
    let n = cell.vertices.len();
    let a = cell.vertices[e];
    let b = cell.vertices[(e + 1) % n];
    let pa = cell.coords[e];
    let pb = cell.coords[(e + 1) % n];
    let wx = ((pb[0] - pa[0] - (vertices[b][0] - vertices[a][0])) / lx).round() as i64;
    let wy = ((pb[1] - pa[1] - (vertices[b][1] - vertices[a][1])) / ly).round() as i64;
    if a < b || (a == b && (wx, wy) > (-wx, -wy)) {
        Ok(((a, b, wx, wy), true))
    } else if a > b || (a == b && (wx, wy) < (-wx, -wy)) {
        Ok(((b, a, -wx, -wy), false))
    } else {
        Err(Error::Topology("degenerate edge".into()))
    }
}

/// Signed area of a closed polygon, positive when counterclockwise.
pub fn polygon_area(p: &[[f64; 2]]) -> f64 {
    signed_area(p)
}
