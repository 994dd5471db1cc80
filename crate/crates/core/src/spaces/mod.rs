//! Finite element spaces of the discrete complex
//! `A_{k+1} -> dB^curl_k -> C_k` and its rotated counterpart
//! `A_{k+1} -> dB^div_k -> C_k`, plus scalar and tensor DG spaces.
//!
//! Reference bases are tabulated once at the shared quadrature points; the
//! per-point pullback is applied on the fly.

pub mod geometry;
pub mod poly;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh};
use crate::operators::MassOperator;

pub use geometry::{map_full, map_point, CellFrame, MappedValue, MeshQuadrature, PointGeometry, QuadratureOrders, Transform};
use poly::{edge_point, NodeLocation, Poly};

pub const MAX_DEGREE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Continuous Lagrange `A_{k+1}` (degree `k + 1`).
    ContinuousScalar,
    DgScalar,
    VectorTensor,
    VectorDivOptimal,
    VectorCurlOptimal,
    CellFace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceFamily {
    pub family: Family,
    pub degree: usize,
}

impl SpaceFamily {
    pub fn new(family: Family, degree: usize) -> SpaceFamily {
        SpaceFamily { family, degree }
    }

    pub fn transform(&self) -> Transform {
        match self.family {
            Family::ContinuousScalar | Family::DgScalar => Transform::Scalar,
            Family::VectorTensor => Transform::VectorIdentity,
            Family::VectorDivOptimal => Transform::Piola,
            Family::VectorCurlOptimal => Transform::Covariant,
            Family::CellFace => Transform::Density,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.family, Family::VectorTensor | Family::VectorDivOptimal | Family::VectorCurlOptimal)
    }
}

/// Reference basis functions tabulated at a list of reference points.
#[derive(Debug, Clone, Default)]
pub struct Tabulation {
    pub n_points: usize,
    pub n_basis: usize,
    /// `values[p * n_basis + i]`
    pub values: Vec<[f64; 2]>,
    /// `grads[p * n_basis + i][c][k]`
    pub grads: Vec<[[f64; 2]; 2]>,
}

impl Tabulation {
    fn new(basis: &[[Poly; 2]], points: &[[f64; 2]]) -> Tabulation {
        let n = basis.len();
        let mut values = Vec::with_capacity(n * points.len());
        let mut grads = Vec::with_capacity(n * points.len());
        for &p in points {
            for f in basis {
                let (v0, g0) = f[0].eval(p);
                let (v1, g1) = f[1].eval(p);
                values.push([v0, v1]);
                grads.push([g0, g1]);
            }
        }
        Tabulation { n_points: points.len(), n_basis: n, values, grads }
    }

    #[inline]
    pub fn value(&self, p: usize, i: usize) -> [f64; 2] {
        self.values[p * self.n_basis + i]
    }

    #[inline]
    pub fn grad(&self, p: usize, i: usize) -> [[f64; 2]; 2] {
        self.grads[p * self.n_basis + i]
    }
}

/// Reference basis of one cell kind with its tabulations.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub kind: CellKind,
    pub basis: Vec<[Poly; 2]>,
    pub cell: Tabulation,
    /// Per local edge: tabulation at side points traversed forward (left
    /// cell) and backward (right cell).
    pub edges: Vec<[Tabulation; 2]>,
    pub nodes: Vec<NodeLocation>,
}

impl ReferenceElement {
    fn new(kind: CellKind, family: SpaceFamily, quad: &MeshQuadrature) -> Result<ReferenceElement> {
        let k = family.degree;
        let (basis, nodes) = match family.family {
            Family::ContinuousScalar => poly::lagrange(kind, k + 1)?,
            Family::DgScalar => (poly::scalar_dg(kind, k), Vec::new()),
            Family::VectorTensor => (poly::vector_tensor(kind, k), Vec::new()),
            Family::VectorDivOptimal => (poly::vector_div_optimal(kind, k), Vec::new()),
            Family::VectorCurlOptimal => (poly::vector_curl_optimal(kind, k), Vec::new()),
            Family::CellFace => (poly::cellface_cell(kind, k), Vec::new()),
        };
        let cell = Tabulation::new(&basis, &quad.rule(kind).points);
        let n_edges = kind.n_vertices();
        let edges = (0..n_edges)
            .map(|e| {
                let fwd: Vec<[f64; 2]> = quad.side_t.iter().map(|&t| edge_point(kind, e, t)).collect();
                let bwd: Vec<[f64; 2]> = quad.side_t.iter().map(|&t| edge_point(kind, e, 1.0 - t)).collect();
                [Tabulation::new(&basis, &fwd), Tabulation::new(&basis, &bwd)]
            })
            .collect();
        Ok(ReferenceElement { kind, basis, cell, edges, nodes })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub enum DofMap {
    /// Cell `c` owns the contiguous range `offsets[c]..offsets[c + 1]`.
    Discontinuous { offsets: Vec<usize> },
    /// Global index of each local basis function.
    Continuous { cell_dofs: Vec<Vec<usize>> },
    /// Cell blocks first, then `per_side` functions per side.
    CellFace { offsets: Vec<usize>, side_offset: usize, per_side: usize },
}

/// Basis values at a physical point: `values[i]` (scalars in component 0),
/// `gradients[i][c]`, `divergence[i]`, `curl[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisEval {
    pub point: [f64; 2],
    pub values: Vec<[f64; 2]>,
    pub gradients: Vec<[[f64; 2]; 2]>,
    pub divergence: Vec<f64>,
    pub curl: Vec<f64>,
}

pub struct FiniteElementSpace {
    pub family: SpaceFamily,
    pub mesh: Arc<Mesh>,
    pub quadrature: Arc<MeshQuadrature>,
    /// Indexed by `kind_index`.
    pub elements: [Option<ReferenceElement>; 2],
    pub dofs: DofMap,
    ndofs: usize,
    mass: OnceLock<MassOperator>,
}

impl std::fmt::Debug for FiniteElementSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteElementSpace")
            .field("family", &self.family)
            .field("n_cells", &self.mesh.n_cells())
            .field("ndofs", &self.ndofs)
            .finish()
    }
}

pub fn kind_index(kind: CellKind) -> usize {
    match kind {
        CellKind::Triangle => 0,
        CellKind::Quad => 1,
    }
}

/// Builds a space with the default quadrature for its degree.
pub fn build_space(mesh: Arc<Mesh>, family: SpaceFamily) -> Result<Arc<FiniteElementSpace>> {
    let quad = Arc::new(MeshQuadrature::new(&mesh, QuadratureOrders::for_degree(family.degree))?);
    FiniteElementSpace::new(mesh, family, quad)
}

impl FiniteElementSpace {
    pub fn new(mesh: Arc<Mesh>, family: SpaceFamily, quadrature: Arc<MeshQuadrature>) -> Result<Arc<FiniteElementSpace>> {
        if family.degree > MAX_DEGREE {
            return Err(Error::Unsupported(format!("degree {} (supported: 0..={MAX_DEGREE})", family.degree)));
        }
        let mut elements: [Option<ReferenceElement>; 2] = [None, None];
        for kind in [CellKind::Triangle, CellKind::Quad] {
            if mesh.cells.iter().any(|c| c.kind == kind) {
                elements[kind_index(kind)] = Some(ReferenceElement::new(kind, family, &quadrature)?);
            }
        }
        let local_dim = |kind: CellKind| elements[kind_index(kind)].as_ref().map_or(0, |e| e.dim());
        let (dofs, ndofs) = match family.family {
            Family::ContinuousScalar => continuous_dofs(&mesh, family.degree + 1, &elements),
            Family::CellFace => {
                let mut offsets = Vec::with_capacity(mesh.n_cells() + 1);
                offsets.push(0);
                for c in &mesh.cells {
                    offsets.push(offsets.last().unwrap() + local_dim(c.kind));
                }
                let side_offset = *offsets.last().unwrap();
                let per_side = family.degree + 1;
                let n = side_offset + per_side * mesh.n_sides();
                (DofMap::CellFace { offsets, side_offset, per_side }, n)
            }
            _ => {
                let mut offsets = Vec::with_capacity(mesh.n_cells() + 1);
                offsets.push(0);
                for c in &mesh.cells {
                    offsets.push(offsets.last().unwrap() + local_dim(c.kind));
                }
                let n = *offsets.last().unwrap();
                (DofMap::Discontinuous { offsets }, n)
            }
        };
        Ok(Arc::new(FiniteElementSpace { family, mesh, quadrature, elements, dofs, ndofs, mass: OnceLock::new() }))
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn degree(&self) -> usize {
        self.family.degree
    }

    pub fn element(&self, kind: CellKind) -> &ReferenceElement {
        self.elements[kind_index(kind)].as_ref().expect("space has no element for this cell kind")
    }

    pub fn cell_element(&self, c: usize) -> &ReferenceElement {
        self.element(self.mesh.cells[c].kind)
    }

    /// Number of basis functions supported in cell `c` (cell block only for
    /// the cell-face space).
    pub fn local_dim(&self, c: usize) -> usize {
        self.cell_element(c).dim()
    }

    /// Global index of local basis function `i` of cell `c`.
    #[inline]
    pub fn global_dof(&self, c: usize, i: usize) -> usize {
        match &self.dofs {
            DofMap::Discontinuous { offsets } | DofMap::CellFace { offsets, .. } => offsets[c] + i,
            DofMap::Continuous { cell_dofs } => cell_dofs[c][i],
        }
    }

    /// Contiguous DOF range of cell `c` for discontinuous layouts.
    pub fn cell_range(&self, c: usize) -> Option<std::ops::Range<usize>> {
        match &self.dofs {
            DofMap::Discontinuous { offsets } | DofMap::CellFace { offsets, .. } => Some(offsets[c]..offsets[c + 1]),
            DofMap::Continuous { .. } => None,
        }
    }

    /// DOF range of side `s` in a cell-face space.
    pub fn side_range(&self, s: usize) -> Option<std::ops::Range<usize>> {
        match &self.dofs {
            DofMap::CellFace { side_offset, per_side, .. } => {
                Some(side_offset + s * per_side..side_offset + (s + 1) * per_side)
            }
            _ => None,
        }
    }

    /// Side basis of the cell-face space, `(2t - 1)^j`.
    pub fn side_basis(&self, t: f64) -> Vec<f64> {
        let per_side = match &self.dofs {
            DofMap::CellFace { per_side, .. } => *per_side,
            _ => 0,
        };
        (0..per_side).map(|j| (2.0 * t - 1.0).powi(j as i32)).collect()
    }

    pub fn mass(&self) -> Result<&MassOperator> {
        if let Some(m) = self.mass.get() {
            return Ok(m);
        }
        let m = MassOperator::assemble(self)?;
        Ok(self.mass.get_or_init(|| m))
    }

    /// Pulls back the reference function value `vh` with gradient `gh` at the
    /// given point of cell `c`.
    #[inline]
    pub fn map(&self, c: usize, g: &PointGeometry, vh: [f64; 2], gh: [[f64; 2]; 2]) -> MappedValue {
        map_full(self.family.transform(), g, &self.quadrature.frames[c], vh, gh)
    }

    /// Physical basis data at reference point `p` of cell `c`.
    pub fn evaluate_basis(&self, c: usize, p: [f64; 2]) -> BasisEval {
        let cell = &self.mesh.cells[c];
        let g = map_point(cell, p);
        let el = self.element(cell.kind);
        let mut out = BasisEval { point: g.x, ..Default::default() };
        for f in &el.basis {
            let (v0, g0) = f[0].eval(p);
            let (v1, g1) = f[1].eval(p);
            let m = self.map(c, &g, [v0, v1], [g0, g1]);
            out.values.push(m.value);
            out.gradients.push(m.grad);
            out.divergence.push(m.div);
            out.curl.push(m.curl);
        }
        out
    }

    /// Basis data of both incident cells at parameter `t` of side `s`; the
    /// returned points are in each cell's own frame.
    pub fn trace_on_side(&self, s: usize, t: f64) -> (BasisEval, BasisEval) {
        let side = &self.mesh.sides[s];
        let lc = &self.mesh.cells[side.left];
        let rc = &self.mesh.cells[side.right];
        let left = self.evaluate_basis(side.left, edge_point(lc.kind, side.left_edge, t));
        let right = self.evaluate_basis(side.right, edge_point(rc.kind, side.right_edge, 1.0 - t));
        (left, right)
    }

    /// Mapped value of basis `i` of cell `c` at its `q`-th cell quadrature
    /// point, where `q` is local to the cell.
    #[inline]
    pub fn cell_point(&self, c: usize, q: usize, i: usize) -> MappedValue {
        let el = self.cell_element(c);
        let g = &self.quadrature.points[self.quadrature.cell_start[c] + q];
        self.map(c, g, el.cell.value(q, i), el.cell.grad(q, i))
    }

    /// Mapped value of basis `i` of the left (`right = false`) or right cell
    /// of side `s` at side quadrature point `q`.
    #[inline]
    pub fn side_point(&self, s: usize, q: usize, right: bool, i: usize) -> MappedValue {
        let side = &self.mesh.sides[s];
        let nq = self.quadrature.n_side_points();
        let (c, e, g) = if right {
            (side.right, side.right_edge, &self.quadrature.side_right[s * nq + q])
        } else {
            (side.left, side.left_edge, &self.quadrature.side_left[s * nq + q])
        };
        let tab = &self.cell_element(c).edges[e][right as usize];
        self.map(c, g, tab.value(q, i), tab.grad(q, i))
    }

    /// Evaluates a field given by its coefficients at reference point `p` of
    /// cell `c` (cell block only for cell-face spaces).
    pub fn field_value(&self, coeffs: &[f64], c: usize, p: [f64; 2]) -> MappedValue {
        let e = self.evaluate_basis(c, p);
        let mut out = MappedValue::default();
        for i in 0..e.values.len() {
            let a = coeffs[self.global_dof(c, i)];
            for k in 0..2 {
                out.value[k] += a * e.values[i][k];
                for m in 0..2 {
                    out.grad[k][m] += a * e.gradients[i][k][m];
                }
            }
            out.div += a * e.divergence[i];
            out.curl += a * e.curl[i];
        }
        out
    }
}

fn continuous_dofs(mesh: &Mesh, m: usize, elements: &[Option<ReferenceElement>; 2]) -> (DofMap, usize) {
    let nv = mesh.n_vertices();
    let per_edge = m - 1;
    let mut next_interior = nv + per_edge * mesh.n_sides();
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for cell in &mesh.cells {
        let el = elements[kind_index(cell.kind)].as_ref().unwrap();
        let mut d = Vec::with_capacity(el.nodes.len());
        for loc in &el.nodes {
            d.push(match *loc {
                NodeLocation::Vertex(v) => cell.vertices[v],
                NodeLocation::Edge(e, q) => {
                    let qs = if cell.is_left[e] { q } else { m - q };
                    nv + cell.sides[e] * per_edge + qs - 1
                }
                NodeLocation::Interior => {
                    next_interior += 1;
                    next_interior - 1
                }
            });
        }
        cell_dofs.push(d);
    }
    (DofMap::Continuous { cell_dofs }, next_interior)
}

/// A coefficient vector on a space.
#[derive(Debug, Clone)]
pub struct Field {
    pub space: Arc<FiniteElementSpace>,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &Arc<FiniteElementSpace>) -> Field {
        Field { space: space.clone(), coeffs: vec![0.0; space.ndofs()] }
    }

    pub fn new(space: &Arc<FiniteElementSpace>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != space.ndofs() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {} does not match space dimension {}",
                coeffs.len(),
                space.ndofs()
            )));
        }
        Ok(Field { space: space.clone(), coeffs })
    }

    pub fn value(&self, c: usize, p: [f64; 2]) -> MappedValue {
        self.space.field_value(&self.coeffs, c, p)
    }
}

/// The spaces of one discretization degree on a mesh, sharing quadrature.
#[derive(Debug, Clone)]
pub struct DiscreteComplex {
    pub degree: usize,
    pub mesh: Arc<Mesh>,
    pub quadrature: Arc<MeshQuadrature>,
    pub potentials: Arc<FiniteElementSpace>,
    pub div: Arc<FiniteElementSpace>,
    pub curl: Arc<FiniteElementSpace>,
    pub tensor: Arc<FiniteElementSpace>,
    pub scalar: Arc<FiniteElementSpace>,
    pub cellface: Arc<FiniteElementSpace>,
}

impl DiscreteComplex {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<DiscreteComplex> {
        Self::with_orders(mesh, degree, QuadratureOrders::for_degree(degree))
    }

    pub fn with_orders(mesh: Arc<Mesh>, degree: usize, orders: QuadratureOrders) -> Result<DiscreteComplex> {
        let quadrature = Arc::new(MeshQuadrature::new(&mesh, orders)?);
        let make = |f: Family| FiniteElementSpace::new(mesh.clone(), SpaceFamily::new(f, degree), quadrature.clone());
        Ok(DiscreteComplex {
            degree,
            potentials: make(Family::ContinuousScalar)?,
            div: make(Family::VectorDivOptimal)?,
            curl: make(Family::VectorCurlOptimal)?,
            tensor: make(Family::VectorTensor)?,
            scalar: make(Family::DgScalar)?,
            cellface: make(Family::CellFace)?,
            mesh,
            quadrature,
        })
    }

    pub fn space(&self, family: Family) -> &Arc<FiniteElementSpace> {
        match family {
            Family::ContinuousScalar => &self.potentials,
            Family::DgScalar => &self.scalar,
            Family::VectorTensor => &self.tensor,
            Family::VectorDivOptimal => &self.div,
            Family::VectorCurlOptimal => &self.curl,
            Family::CellFace => &self.cellface,
        }
    }
}
