//! Small dense factorizations and a sparse symmetric solver.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense symmetric positive definite matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct DenseSpd {
    pub n: usize,
    /// Row-major matrix.
    pub matrix: Vec<f64>,
    /// Row-major lower-triangular factor.
    factor: Vec<f64>,
}

impl DenseSpd {
    /// Returns `None` when the matrix is not numerically positive definite.
    pub fn new(n: usize, matrix: Vec<f64>) -> Option<DenseSpd> {
        assert_eq!(matrix.len(), n * n);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = matrix[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = matrix[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(DenseSpd { n, matrix, factor: l })
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.factor;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[k * n + i] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
    }

    /// `y = A x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            y[i] = dot(&self.matrix[i * n..(i + 1) * n], x);
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Sums duplicate entries of a triplet list.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Csr {
        t.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i * self.n + self.cols[k]] += self.vals[k];
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgSettings {
    pub rel_tol: f64,
    /// Iteration cap as a multiple of `sqrt(n)`.
    pub max_iter_factor: f64,
}

impl Default for CgSettings {
    fn default() -> Self {
        CgSettings { rel_tol: 1e-14, max_iter_factor: 10.0 }
    }
}

/// Jacobi-preconditioned conjugate gradients for `A x = b`, starting from the
/// contents of `x`. Returns the iteration count.
pub fn pcg(a: &Csr, inv_diag: &[f64], b: &[f64], x: &mut [f64], settings: CgSettings) -> Result<usize> {
    let n = a.n;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let max_iter = ((settings.max_iter_factor * (n as f64).sqrt()).ceil() as usize).max(20);
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = settings.rel_tol * bnorm;
    let mut res = norm(&r);
    for it in 0..max_iter {
        if res <= target {
            return Ok(it);
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        res = norm(&r);
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= target {
        return Ok(max_iter);
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res / bnorm })
}

/// Numerical rank of a dense row-major `rows x cols` matrix from its singular
/// values, relative to the largest one.
pub fn numerical_rank(rows: usize, cols: usize, data: &[f64], rel_tol: f64) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let m = nalgebra::DMatrix::from_row_slice(rows, cols, data);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Inverse of a small dense row-major matrix.
pub fn invert(n: usize, data: &[f64]) -> Option<Vec<f64>> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, data);
    let inv = m.try_inverse()?;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = inv[(i, j)];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let m = DenseSpd::new(3, a.clone()).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        m.apply(&x, &mut b);
        m.solve(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(DenseSpd::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_none());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = Csr::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (0, 1, 1.0)]);
        assert_eq!(a.to_dense(), vec![4.0, 1.0, 0.0, 2.0]);
        assert_eq!(a.diagonal(), vec![4.0, 2.0]);
    }

    #[test]
    fn pcg_matches_dense_solution() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = Csr::from_triplets(n, t);
        let inv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.apply(&xs, &mut b);
        let mut x = vec![0.0; n];
        pcg(&a, &inv, &b, &mut x, CgSettings::default()).unwrap();
        for i in 0..n {
            assert!((x[i] - xs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_of_outer_product() {
        let d = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        assert_eq!(numerical_rank(3, 2, &d, 1e-12), 1);
    }
}
