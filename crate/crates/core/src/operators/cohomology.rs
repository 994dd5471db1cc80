use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::spaces::{DiscreteComplex, Field};

use super::{dist_curl, grad_apply};

pub const MAX_COHOMOLOGY_CELLS: usize = 8;

/// Dimensions read off the discrete complex `A -> dB^curl -> C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dim_potentials: usize,
    pub dim_vector: usize,
    pub dim_cellface: usize,
    pub rank_grad: usize,
    pub rank_curl: usize,
    /// `dim ker grad`
    pub b0: usize,
    /// `dim ker curl - rank grad`
    pub b1: usize,
    /// `dim C - rank curl`
    pub b2: usize,
}

/// Ranks of the gradient and distributional curl matrices by dense SVD,
/// built column by column from the unit coefficient vectors.
pub fn cohomology_report(cx: &DiscreteComplex) -> Result<CohomologyReport> {
    if cx.mesh.n_cells() > MAX_COHOMOLOGY_CELLS {
        return Err(Error::InvalidArgument(format!(
            "cohomology report limited to {MAX_COHOMOLOGY_CELLS} cells, mesh has {}",
            cx.mesh.n_cells()
        )));
    }
    let na = cx.potentials.ndofs();
    let nv = cx.curl.ndofs();
    let nc = cx.cellface.ndofs();
    let mut grad = vec![0.0; nv * na];
    for j in 0..na {
        let mut f = Field::zeros(&cx.potentials);
        f.coeffs[j] = 1.0;
        let g = grad_apply(&f, &cx.curl)?;
        for i in 0..nv {
            grad[i * na + j] = g.coeffs[i];
        }
    }
    let mut curl = vec![0.0; nc * nv];
    for j in 0..nv {
        let mut u = Field::zeros(&cx.curl);
        u.coeffs[j] = 1.0;
        let d = dist_curl(&u, &cx.cellface)?;
        for i in 0..nc {
            curl[i * nv + j] = d.coeffs[i];
        }
    }
    let tol = 1e-10;
    let rank_grad = numerical_rank(nv, na, &grad, tol);
    let rank_curl = numerical_rank(nc, nv, &curl, tol);
    Ok(CohomologyReport {
        dim_potentials: na,
        dim_vector: nv,
        dim_cellface: nc,
        rank_grad,
        rank_curl,
        b0: na - rank_grad,
        b1: (nv - rank_curl).saturating_sub(rank_grad),
        b2: nc - rank_curl,
    })
}
