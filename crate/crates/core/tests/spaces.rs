mod common;

use common::*;
use dgcomplex::operators::*;
use dgcomplex::quadrature::*;
use dgcomplex::spaces::DiscreteComplex;
use proptest::prelude::*;

fn monomial_integral_square(i: u32, j: u32) -> f64 {
    1.0 / ((i + 1) as f64 * (j + 1) as f64)
}

/// Integral of x^i y^j over the unit triangle: i! j! / (i + j + 2)!.
fn monomial_integral_triangle(i: u32, j: u32) -> f64 {
    let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
    f(i) * f(j) / f(i + j + 2)
}

proptest! {
    #[test]
    fn square_rule_is_exact(n in 1..8usize, i in 0..16u32, j in 0..16u32) {
        prop_assume!((i as usize) < 2 * n && (j as usize) < 2 * n);
        let r = square_rule(n).unwrap();
        let v = r.integrate(|p| p[0].powi(i as i32) * p[1].powi(j as i32));
        prop_assert!((v - monomial_integral_square(i, j)).abs() <= 1e-13);
    }

    #[test]
    fn triangle_rule_is_exact(d in 0..12usize, i in 0..12u32, j in 0..12u32) {
        prop_assume!((i + j) as usize <= d);
        let r = triangle_rule(d).unwrap();
        let v = r.integrate(|p| p[0].powi(i as i32) * p[1].powi(j as i32));
        prop_assert!((v - monomial_integral_triangle(i, j)).abs() <= 1e-13);
    }
}

#[test]
fn rules_reject_unsupported_orders() {
    assert!(segment_rule(0).is_err());
    assert!(square_rule(MAX_POINTS + 1).is_err());
    assert!(triangle_rule(MAX_TRIANGLE_DEGREE + 1).is_err());
}

#[test]
fn projection_reproduces_polynomials_on_affine_meshes() {
    use dgcomplex::diagnostics::l2_error;
    for mesh in [cartesian(3), cartesian_triangles(3)] {
        for k in 0..=2 {
            let cx = DiscreteComplex::new(mesh.clone(), k).unwrap();
            let f = move |x: [f64; 2]| {
                if k == 0 {
                    [1.0, -2.0]
                } else {
                    [1.0 + x[0] - 0.5 * x[1], -2.0 + 3.0 * x[1]]
                }
            };
            for sp in [&cx.div, &cx.curl, &cx.tensor] {
                let u = l2_project(sp, f).unwrap();
                assert!(l2_error(&u, f).unwrap() <= 1e-12, "k={k} {:?}", sp.family);
            }
        }
    }
}

#[test]
fn dimensions_match_the_torus_complex() {
    for (name, mesh) in coarse_meshes(3) {
        for k in 0..=2 {
            let cx = DiscreteComplex::new(mesh.clone(), k).unwrap();
            let per_cell = |c| cx.curl.local_dim(c);
            let quads = mesh.is_all_quads();
            let expect = if quads { 2 * ((k + 1) * (k + 1) + k) + 1 } else { (k + 1) * (k + 2) };
            assert_eq!(per_cell(0), expect, "{name} k={k}");
            assert_eq!(cx.div.ndofs(), cx.curl.ndofs());
            assert!(cx.potentials.ndofs() < cx.curl.ndofs());
        }
    }
}
