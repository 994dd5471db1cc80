//! Reference polynomial bases in the centered variables `s = 2x - 1`,
//! `r = 2y - 1` of the reference cell.

use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::CellKind;

/// Sparse polynomial in `(s, r)`: list of `(coefficient, power of s, power of r)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn monomial(i: u32, j: u32) -> Poly {
        Poly { terms: vec![(1.0, i, j)] }
    }

    pub fn scaled(mut self, a: f64) -> Poly {
        for t in &mut self.terms {
            t.0 *= a;
        }
        self
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.1 + t.2).max().unwrap_or(0)
    }

    /// Value and gradient with respect to the reference coordinates `(x, y)`.
    pub fn eval(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let s = 2.0 * p[0] - 1.0;
        let r = 2.0 * p[1] - 1.0;
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for &(c, i, j) in &self.terms {
            let si = s.powi(i as i32);
            let rj = r.powi(j as i32);
            v += c * si * rj;
            if i > 0 {
                g[0] += 2.0 * c * i as f64 * s.powi(i as i32 - 1) * rj;
            }
            if j > 0 {
                g[1] += 2.0 * c * j as f64 * si * r.powi(j as i32 - 1);
            }
        }
        (v, g)
    }
}

/// Exponent pairs of `Q_{a,b}`.
fn q_set(a: i32, b: i32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if a < 0 || b < 0 {
        return out;
    }
    for j in 0..=b as u32 {
        for i in 0..=a as u32 {
            out.push((i, j));
        }
    }
    out
}

/// Exponent pairs of `P_k`.
fn p_set(k: i32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if k < 0 {
        return out;
    }
    for d in 0..=k as u32 {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

/// Scalar exponents of the DG scalar space on a cell kind.
pub fn dg_scalar_exponents(kind: CellKind, k: usize) -> Vec<(u32, u32)> {
    match kind {
        CellKind::Quad => q_set(k as i32, k as i32),
        CellKind::Triangle => p_set(k as i32),
    }
}

fn vector_from(xs: &[(u32, u32)], ys: &[(u32, u32)]) -> Vec<[Poly; 2]> {
    let mut out: Vec<[Poly; 2]> = xs.iter().map(|&(i, j)| [Poly::monomial(i, j), Poly::zero()]).collect();
    out.extend(ys.iter().map(|&(i, j)| [Poly::zero(), Poly::monomial(i, j)]));
    out
}

pub fn scalar_dg(kind: CellKind, k: usize) -> Vec<[Poly; 2]> {
    dg_scalar_exponents(kind, k).into_iter().map(|(i, j)| [Poly::monomial(i, j), Poly::zero()]).collect()
}

pub fn vector_tensor(kind: CellKind, k: usize) -> Vec<[Poly; 2]> {
    let s = dg_scalar_exponents(kind, k);
    vector_from(&s, &s)
}

/// Divergence-optimal vector basis; `P_k^2` on triangles.
pub fn vector_div_optimal(kind: CellKind, k: usize) -> Vec<[Poly; 2]> {
    if kind == CellKind::Triangle {
        return vector_tensor(kind, k);
    }
    let k = k as i32;
    let mut xs = q_set(k, k);
    xs.extend((0..k).map(|j| ((k + 1) as u32, j as u32)));
    let mut ys = q_set(k, k);
    ys.extend((0..k).map(|i| (i as u32, (k + 1) as u32)));
    let mut out = vector_from(&xs, &ys);
    let (k1, k0) = ((k + 1) as u32, k as u32);
    out.push([Poly::monomial(k1, k0).scaled(-1.0), Poly::monomial(k0, k1)]);
    out
}

/// Curl-optimal vector basis; `P_k^2` on triangles.
pub fn vector_curl_optimal(kind: CellKind, k: usize) -> Vec<[Poly; 2]> {
    if kind == CellKind::Triangle {
        return vector_tensor(kind, k);
    }
    let k = k as i32;
    let mut xs = q_set(k, k);
    xs.extend((0..k).map(|i| (i as u32, (k + 1) as u32)));
    let mut ys = q_set(k, k);
    ys.extend((0..k).map(|j| ((k + 1) as u32, j as u32)));
    let mut out = vector_from(&xs, &ys);
    let (k1, k0) = ((k + 1) as u32, k as u32);
    out.push([Poly::monomial(k0, k1), Poly::monomial(k1, k0)]);
    out
}

/// Cell block of the cell-face space: `Q_k` without `s^k r^k` on quads,
/// `P_{k-1}` on triangles.
pub fn cellface_cell(kind: CellKind, k: usize) -> Vec<[Poly; 2]> {
    let e: Vec<(u32, u32)> = match kind {
        CellKind::Quad => q_set(k as i32, k as i32)
            .into_iter()
            .filter(|&(i, j)| !(i == k as u32 && j == k as u32))
            .collect(),
        CellKind::Triangle => p_set(k as i32 - 1),
    };
    e.into_iter().map(|(i, j)| [Poly::monomial(i, j), Poly::zero()]).collect()
}

/// Position of a Lagrange node on the reference cell boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLocation {
    Vertex(usize),
    /// Local edge and index `q` in `1..m` along the cell's own edge direction.
    Edge(usize, usize),
    Interior,
}

/// Equispaced Lagrange basis of degree `m` with node locations.
pub fn lagrange(kind: CellKind, m: usize) -> Result<(Vec<[Poly; 2]>, Vec<NodeLocation>)> {
    let mi = m as i32;
    type Exponents = Vec<(u32, u32)>;
    type Nodes = Vec<(usize, usize)>;
    let (exps, nodes): (Exponents, Nodes) = match kind {
        CellKind::Quad => (q_set(mi, mi), (0..=m).flat_map(|j| (0..=m).map(move |i| (i, j))).collect()),
        CellKind::Triangle => (
            p_set(mi),
            (0..=m).flat_map(|j| (0..=m - j).map(move |i| (i, j))).collect(),
        ),
    };
    let n = exps.len();
    let mf = m as f64;
    let mut v = vec![0.0; n * n];
    for (p, &(i, j)) in nodes.iter().enumerate() {
        let pt = [i as f64 / mf, j as f64 / mf];
        for (a, &(ei, ej)) in exps.iter().enumerate() {
            v[p * n + a] = Poly::monomial(ei, ej).eval(pt).0;
        }
    }
    let inv = linalg::invert(n, &v).ok_or_else(|| Error::Unsupported("singular Lagrange Vandermonde".into()))?;
    let mut basis = Vec::with_capacity(n);
    for node in 0..n {
        let terms = exps
            .iter()
            .enumerate()
            .map(|(a, &(ei, ej))| (inv[a * n + node], ei, ej))
            .filter(|t| t.0 != 0.0)
            .collect();
        basis.push([Poly { terms }, Poly::zero()]);
    }
    let locs = nodes.iter().map(|&(i, j)| node_location(kind, m, i, j)).collect();
    Ok((basis, locs))
}

fn node_location(kind: CellKind, m: usize, i: usize, j: usize) -> NodeLocation {
    match kind {
        CellKind::Quad => match (i, j) {
            (0, 0) => NodeLocation::Vertex(0),
            (a, 0) if a == m => NodeLocation::Vertex(1),
            (a, b) if a == m && b == m => NodeLocation::Vertex(2),
            (0, b) if b == m => NodeLocation::Vertex(3),
            (a, 0) => NodeLocation::Edge(0, a),
            (a, b) if a == m => NodeLocation::Edge(1, b),
            (a, b) if b == m => NodeLocation::Edge(2, m - a),
            (0, b) => NodeLocation::Edge(3, m - b),
            _ => NodeLocation::Interior,
        },
        CellKind::Triangle => match (i, j) {
            (0, 0) => NodeLocation::Vertex(0),
            (a, 0) if a == m => NodeLocation::Vertex(1),
            (0, b) if b == m => NodeLocation::Vertex(2),
            (a, 0) => NodeLocation::Edge(0, a),
            (a, b) if a + b == m => NodeLocation::Edge(1, b),
            (0, b) => NodeLocation::Edge(2, m - b),
            _ => NodeLocation::Interior,
        },
    }
}

/// Reference coordinates of the point at parameter `tau` along local edge `e`,
/// traversed counterclockwise.
pub fn edge_point(kind: CellKind, e: usize, tau: f64) -> [f64; 2] {
    match (kind, e) {
        (CellKind::Quad, 0) => [tau, 0.0],
        (CellKind::Quad, 1) => [1.0, tau],
        (CellKind::Quad, 2) => [1.0 - tau, 1.0],
        (CellKind::Quad, 3) => [0.0, 1.0 - tau],
        (CellKind::Triangle, 0) => [tau, 0.0],
        (CellKind::Triangle, 1) => [1.0 - tau, tau],
        (CellKind::Triangle, 2) => [0.0, 1.0 - tau],
        _ => panic!("local edge {e} out of range"),
    }
}

pub fn reference_area(kind: CellKind) -> f64 {
    match kind {
        CellKind::Quad => 1.0,
        CellKind::Triangle => 0.5,
    }
}
