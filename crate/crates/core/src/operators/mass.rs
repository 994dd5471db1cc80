use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{pcg, CgSettings, Csr, DenseSpd};
use crate::spaces::{DofMap, FiniteElementSpace};

/// How a mass system is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolveSpec {
    BlockCholesky,
    ConjugateGradient { rel_tol: f64, max_iter_factor: f64 },
}

/// A dense diagonal block covering `start..start + n`.
#[derive(Debug, Clone)]
pub struct MassBlock {
    pub start: usize,
    pub spd: DenseSpd,
}

/// Mass matrix of a space with its solver.
#[derive(Debug, Clone)]
pub enum MassOperator {
    Blocks { n: usize, blocks: Vec<MassBlock> },
    Global { matrix: Csr, inv_diag: Vec<f64>, settings: CgSettings },
}

fn dense_block(n: usize, vals: &[Vec<[f64; 2]>], w: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for (q, &wq) in w.iter().enumerate() {
        let v = &vals[q];
        for i in 0..n {
            for j in 0..=i {
                m[i * n + j] += wq * (v[i][0] * v[j][0] + v[i][1] * v[j][1]);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[j * n + i] = m[i * n + j];
        }
    }
    m
}

impl MassOperator {
    pub fn assemble(space: &FiniteElementSpace) -> Result<MassOperator> {
        let mesh = &space.mesh;
        let quad = &space.quadrature;
        let cell_block = |c: usize| -> Vec<f64> {
            let n = space.local_dim(c);
            let pts = quad.cell_points(c);
            let vals: Vec<Vec<[f64; 2]>> = (0..pts.len())
                .map(|q| (0..n).map(|i| space.cell_point(c, q, i).value).collect())
                .collect();
            dense_block(n, &vals, &quad.weights[pts])
        };
        match &space.dofs {
            DofMap::Continuous { cell_dofs } => {
                let locals: Vec<Vec<f64>> = (0..mesh.n_cells()).into_par_iter().map(cell_block).collect();
                let mut trip = Vec::new();
                for (c, m) in locals.iter().enumerate() {
                    let d = &cell_dofs[c];
                    let n = d.len();
                    for i in 0..n {
                        for j in 0..n {
                            trip.push((d[i], d[j], m[i * n + j]));
                        }
                    }
                }
                let matrix = Csr::from_triplets(space.ndofs(), trip);
                let diag = matrix.diagonal();
                if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                    return Err(Error::NotPositiveDefinite { block: i });
                }
                let inv_diag = diag.iter().map(|d| 1.0 / d).collect();
                Ok(MassOperator::Global { matrix, inv_diag, settings: CgSettings::default() })
            }
            DofMap::Discontinuous { offsets } | DofMap::CellFace { offsets, .. } => {
                let mut blocks: Vec<MassBlock> = (0..mesh.n_cells())
                    .into_par_iter()
                    .filter(|&c| offsets[c + 1] > offsets[c])
                    .map(|c| {
                        let n = offsets[c + 1] - offsets[c];
                        DenseSpd::new(n, cell_block(c))
                            .map(|spd| MassBlock { start: offsets[c], spd })
                            .ok_or(Error::NotPositiveDefinite { block: c })
                    })
                    .collect::<Result<_>>()?;
                if let DofMap::CellFace { side_offset, per_side, .. } = &space.dofs {
                    let nq = quad.n_side_points();
                    let side_blocks: Vec<MassBlock> = (0..mesh.n_sides())
                        .into_par_iter()
                        .map(|s| {
                            let vals: Vec<Vec<[f64; 2]>> = quad
                                .side_t
                                .iter()
                                .map(|&t| space.side_basis(t).into_iter().map(|v| [v, 0.0]).collect())
                                .collect();
                            let m = dense_block(*per_side, &vals, &quad.side_weights[s * nq..(s + 1) * nq]);
                            DenseSpd::new(*per_side, m)
                                .map(|spd| MassBlock { start: side_offset + s * per_side, spd })
                                .ok_or(Error::NotPositiveDefinite { block: mesh.n_cells() + s })
                        })
                        .collect::<Result<_>>()?;
                    blocks.extend(side_blocks);
                }
                Ok(MassOperator::Blocks { n: space.ndofs(), blocks })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MassOperator::Blocks { n, .. } => *n,
            MassOperator::Global { matrix, .. } => matrix.n,
        }
    }

    pub fn solve_spec(&self) -> LinearSolveSpec {
        match self {
            MassOperator::Blocks { .. } => LinearSolveSpec::BlockCholesky,
            MassOperator::Global { settings, .. } => LinearSolveSpec::ConjugateGradient {
                rel_tol: settings.rel_tol,
                max_iter_factor: settings.max_iter_factor,
            },
        }
    }

    /// `y = M x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            MassOperator::Blocks { blocks, .. } => {
                for b in blocks {
                    let r = b.start..b.start + b.spd.n;
                    b.spd.apply(&x[r.clone()], &mut y[r]);
                }
            }
            MassOperator::Global { matrix, .. } => matrix.apply(x, y),
        }
    }

    /// `x^T M y`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut my = vec![0.0; y.len()];
        self.apply(y, &mut my);
        crate::linalg::dot(x, &my)
    }

    /// Overwrites `b` with `M^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        match self {
            MassOperator::Blocks { blocks, .. } => {
                for blk in blocks {
                    blk.spd.solve(&mut b[blk.start..blk.start + blk.spd.n]);
                }
                Ok(())
            }
            MassOperator::Global { matrix, inv_diag, settings } => {
                let mut x = vec![0.0; b.len()];
                pcg(matrix, inv_diag, b, &mut x, *settings)?;
                b.copy_from_slice(&x);
                Ok(())
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Dense copy of the matrix, for small problems.
    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            MassOperator::Blocks { n, blocks } => {
                let mut d = vec![0.0; n * n];
                for b in blocks {
                    let m = b.spd.n;
                    for i in 0..m {
                        for j in 0..m {
                            d[(b.start + i) * n + b.start + j] = b.spd.matrix[i * m + j];
                        }
                    }
                }
                d
            }
            MassOperator::Global { matrix, .. } => matrix.to_dense(),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_cartesian;
    use crate::spaces::{DiscreteComplex, Family};

    fn complex() -> DiscreteComplex {
        DiscreteComplex::new(Arc::new(generate_cartesian(3, 3, 1.0, 1.0).unwrap()), 1).unwrap()
    }

    fn check_solve(m: &MassOperator) {
        let n = m.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let mut b = vec![0.0; n];
        m.apply(&x, &mut b);
        let y = m.solve(&b).unwrap();
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-9, "{i}: {} vs {}", x[i], y[i]);
        }
    }

    #[test]
    fn discontinuous_spaces_use_blocks() {
        let cx = complex();
        let m = cx.div.mass().unwrap();
        assert_eq!(m.solve_spec(), LinearSolveSpec::BlockCholesky);
        assert_eq!(m.dim(), cx.div.ndofs());
        check_solve(m);
    }

    #[test]
    fn continuous_space_uses_conjugate_gradients() {
        let cx = complex();
        let m = cx.potentials.mass().unwrap();
        assert!(matches!(m.solve_spec(), LinearSolveSpec::ConjugateGradient { .. }));
        check_solve(m);
    }

    #[test]
    fn dense_copy_is_symmetric_and_matches_apply() {
        let cx = complex();
        for sp in [&cx.potentials, &cx.curl, cx.space(Family::DgScalar)] {
            let m = sp.mass().unwrap();
            let n = m.dim();
            let d = m.to_dense();
            for i in 0..n {
                for j in 0..n {
                    assert!((d[i * n + j] - d[j * n + i]).abs() < 1e-14);
                }
                assert!(d[i * n + i] > 0.0);
            }
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let mut y = vec![0.0; n];
            m.apply(&x, &mut y);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| d[i * n + j] * x[j]).sum();
                assert!((row - y[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_has_unit_mass_on_the_torus() {
        let cx = complex();
        let m = cx.potentials.mass().unwrap();
        let ones = vec![1.0; m.dim()];
        assert!((m.inner(&ones, &ones) - 1.0).abs() < 1e-13);
    }
}
