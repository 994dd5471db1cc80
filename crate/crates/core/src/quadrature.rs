//! Gauss quadrature on the reference segment, unit square and unit triangle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

pub const MAX_POINTS: usize = 16;
pub const MAX_TRIANGLE_DEGREE: usize = 2 * MAX_POINTS - 2;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule on `[-1, 1]`, exact to degree `2n - 1`. Points are
/// stored in the first coordinate.
pub fn segment_rule(n_points: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_POINTS).contains(&n_points) {
        return Err(Error::Unsupported(format!("segment rule with {n_points} points")));
    }
    let (x, w) = gauss_legendre(n_points);
    Ok(QuadratureRule { points: x.iter().map(|&t| [t, 0.0]).collect(), weights: w })
}

/// Gauss rule on `[0, 1]` as `(points, weights)`.
pub fn unit_interval_rule(n_points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = segment_rule(n_points)?;
    Ok((
        r.points.iter().map(|p| 0.5 * (p[0] + 1.0)).collect(),
        r.weights.iter().map(|w| 0.5 * w).collect(),
    ))
}

/// Tensor Gauss rule on `[0, 1]^2`.
pub fn square_rule(n_points_per_axis: usize) -> Result<QuadratureRule> {
    let (x, w) = unit_interval_rule(n_points_per_axis)?;
    let mut points = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for j in 0..x.len() {
        for i in 0..x.len() {
            points.push([x[i], x[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// Rule on the unit triangle exact to `degree`, built by collapsing a tensor
/// Gauss rule onto the triangle.
pub fn triangle_rule(degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Unsupported(format!("triangle rule of degree {degree}")));
    }
    if degree <= 1 {
        return Ok(QuadratureRule { points: vec![[1.0 / 3.0, 1.0 / 3.0]], weights: vec![0.5] });
    }
    // The collapse adds one degree in the second direction.
    let n = (degree + 2).div_ceil(2);
    let (a, wa) = unit_interval_rule(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let y = a[j];
            let x = a[i] * (1.0 - y);
            points.push([x, y]);
            weights.push(wa[i] * wa[j] * (1.0 - y));
        }
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule() {
        let r = segment_rule(1).unwrap();
        assert_eq!(r.points[0][0], 0.0);
        assert_eq!(r.weights[0], 2.0);
    }

    #[test]
    fn two_point_nodes() {
        let r = segment_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0][0] + s).abs() < 1e-15);
        assert!((r.points[1][0] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert!(segment_rule(0).is_err());
        assert!(segment_rule(MAX_POINTS + 1).is_err());
        assert!(square_rule(MAX_POINTS + 1).is_err());
        assert!(triangle_rule(MAX_TRIANGLE_DEGREE + 1).is_err());
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        for n in 1..=MAX_POINTS {
            let r = segment_rule(n).unwrap();
            for i in 0..n {
                assert!((r.points[i][0] + r.points[n - 1 - i][0]).abs() < 1e-15);
                if i > 0 {
                    assert!(r.points[i][0] > r.points[i - 1][0]);
                }
            }
        }
    }
}
