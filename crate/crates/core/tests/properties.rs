mod common;

use std::f64::consts::PI;

use common::*;
use dgcomplex::operators::*;
use dgcomplex::spaces::{DiscreteComplex, Field, QuadratureOrders};

fn complexes() -> Vec<(String, DiscreteComplex)> {
    let mut out = Vec::new();
    for (name, mesh) in coarse_meshes(4) {
        for k in 0..=2 {
            out.push((format!("{name} k={k}"), DiscreteComplex::new(mesh.clone(), k).unwrap()));
        }
    }
    out
}

/// Rescales a field to unit norm.
fn unit(f: Field) -> Field {
    let n = mass_norm(&f);
    Field::new(&f.space, f.coeffs.iter().map(|c| c / n).collect()).unwrap()
}

fn negate(f: &Field) -> Field {
    Field::new(&f.space, f.coeffs.iter().map(|c| -c).collect()).unwrap()
}

#[test]
fn adjoints_satisfy_their_defining_identities() {
    for (name, cx) in complexes() {
        let f = random_field(&cx.potentials, 1);
        let phi = random_field(&cx.cellface, 2);
        let uc = random_field(&cx.curl, 3);
        let ud = random_field(&cx.div, 4);

        let lhs = inner(&adjoint_grad(&uc, &cx.potentials).unwrap(), &f).unwrap();
        let rhs = inner(&uc, &grad_apply(&f, &cx.curl).unwrap()).unwrap();
        let scale = mass_norm(&uc) * mass_norm(&f).max(1.0);
        assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0) * 10.0, "{name} grad: {lhs} vs {rhs}");

        let lhs = inner(&adjoint_perp(&ud, &cx.potentials).unwrap(), &f).unwrap();
        let rhs = inner(&ud, &perp_apply(&f, &cx.div).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0) * 10.0, "{name} perp: {lhs} vs {rhs}");

        let lhs = inner(&adjoint_dist_div(&phi, &cx.div).unwrap(), &ud).unwrap();
        let rhs = inner(&phi, &dist_div(&ud, &cx.cellface).unwrap()).unwrap();
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        assert!(rel <= 1e-12, "{name} dist_div: {lhs} vs {rhs}");

        let lhs = inner(&adjoint_dist_curl(&phi, &cx.curl).unwrap(), &uc).unwrap();
        let rhs = inner(&phi, &dist_curl(&uc, &cx.cellface).unwrap()).unwrap();
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        assert!(rel <= 1e-12, "{name} dist_curl: {lhs} vs {rhs}");
    }
}

#[test]
fn distributional_operators_vanish_on_gradients() {
    for (name, cx) in complexes() {
        let f = random_field(&cx.potentials, 5);
        let g = grad_apply(&f, &cx.curl).unwrap();
        let r = mass_norm(&dist_curl(&g, &cx.cellface).unwrap());
        assert!(r <= 1e-12 * mass_norm(&g).max(1.0), "{name} dist_curl(grad) = {r:e}");
        let g = perp_apply(&f, &cx.div).unwrap();
        let r = mass_norm(&dist_div(&g, &cx.cellface).unwrap());
        assert!(r <= 1e-12 * mass_norm(&g).max(1.0), "{name} dist_div(perp) = {r:e}");
    }
}

#[test]
fn kernel_chain_of_adjoints() {
    for (name, cx) in complexes() {
        let phi = unit(random_field(&cx.cellface, 6));
        let r = mass_norm(&adjoint_grad(&adjoint_dist_curl(&phi, &cx.curl).unwrap(), &cx.potentials).unwrap());
        assert!(r <= 1e-11, "{name} adjoint_grad(adjoint_dist_curl) = {r:e}");
        let r = mass_norm(&adjoint_perp(&adjoint_dist_div(&phi, &cx.div).unwrap(), &cx.potentials).unwrap());
        assert!(r <= 1e-11, "{name} adjoint_perp(adjoint_dist_div) = {r:e}");
    }
}

#[test]
fn commutation_with_piecewise_polynomial_potentials() {
    for (name, mesh) in [("cartesian", cartesian(4)), ("cartesian triangles", cartesian_triangles(4))] {
        for k in 0..=2 {
            let cx = DiscreteComplex::new(mesh.clone(), k).unwrap();
            let g = random_field(&cx.potentials, 7);
            let gh = cellface_project_field(&cx.cellface, &g).unwrap();
            let lhs = adjoint_dist_div(&gh, &cx.div).unwrap();
            let rhs = negate(&grad_apply(&g, &cx.div).unwrap());
            let r = diff_norm(&lhs, &rhs);
            assert!(r <= 1e-12 * mass_norm(&rhs).max(1.0), "{name} k={k} div: {r:e}");
            let lhs = adjoint_dist_curl(&gh, &cx.curl).unwrap();
            let rhs = negate(&perp_apply(&g, &cx.curl).unwrap());
            let r = diff_norm(&lhs, &rhs);
            assert!(r <= 1e-12 * mass_norm(&rhs).max(1.0), "{name} k={k} curl: {r:e}");
        }
    }
}

#[test]
fn commutation_with_smooth_potential_on_bilinear_quads() {
    let g = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
    let grad = |x: [f64; 2]| {
        let (s, c) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[0]).cos());
        let (sy, cy) = ((2.0 * PI * x[1]).sin(), (2.0 * PI * x[1]).cos());
        [2.0 * PI * c * cy, -2.0 * PI * s * sy]
    };
    let mesh = perturbed(4);
    for k in 0..=2 {
        let mut last = f64::INFINITY;
        for extra in [0, 4] {
            let base = QuadratureOrders::for_degree(k);
            let orders = QuadratureOrders {
                quad_points: base.quad_points + extra,
                tri_degree: base.tri_degree + 2 * extra,
                side_points: base.side_points + extra,
            };
            let cx = DiscreteComplex::with_orders(mesh.clone(), k, orders).unwrap();
            let gh = cellface_project(&cx.cellface, g).unwrap();
            let lhs = adjoint_dist_div(&gh, &cx.div).unwrap();
            let rhs = l2_project(&cx.div, |x| {
                let d = grad(x);
                [-d[0], -d[1]]
            })
            .unwrap();
            let r = diff_norm(&lhs, &rhs);
            let lhs = adjoint_dist_curl(&gh, &cx.curl).unwrap();
            let rhs = l2_project(&cx.curl, |x| {
                let d = grad(x);
                [d[1], -d[0]]
            })
            .unwrap();
            let r = r.max(diff_norm(&lhs, &rhs));
            println!("k={k} extra={extra} residual {r:e}");
            assert!(r < last, "residual does not shrink with quadrature order");
            last = r;
        }
        assert!(last <= 1e-8, "k={k}: {last:e}");
    }
}

#[test]
fn betti_numbers_of_the_torus() {
    for k in 0..=2 {
        let cx = DiscreteComplex::new(cartesian(2), k).unwrap();
        let rep = cohomology_report(&cx).unwrap();
        assert_eq!((rep.b0, rep.b1, rep.b2), (1, 2, 1), "k={k}: {rep:?}");
    }
    let cx = DiscreteComplex::new(cartesian_triangles(2), 1).unwrap();
    let rep = cohomology_report(&cx).unwrap();
    assert_eq!((rep.b0, rep.b1), (1, 2), "triangles: {rep:?}");
}

#[test]
fn divergence_free_initialization_has_zero_adjoint_divergence() {
    let f0 = |x: [f64; 2]| {
        let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.75).powi(2)).sqrt() / 0.125;
        2e-3 * 0.125 * (1.0 - r * r).max(0.0) / 2.0
    };
    for (name, cx) in complexes() {
        let u = divfree_init(f0, &cx.curl, &cx.cellface).unwrap();
        let d = mass_norm(&adjoint_grad(&u, &cx.potentials).unwrap());
        assert!(d <= 1e-12, "{name}: {d:e}");
        assert!(mass_norm(&u) > 1e-6, "{name}: trivial field");
    }
}
