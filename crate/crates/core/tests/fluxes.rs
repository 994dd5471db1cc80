use dgcomplex::systems::*;
use proptest::prelude::*;

const FAMILIES: [FluxFamily; 4] =
    [FluxFamily::Godunov, FluxFamily::LaxFriedrich, FluxFamily::LfNormalDiffusion, FluxFamily::LfTangentialDiffusion];

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

fn vec2() -> impl Strategy<Value = [f64; 2]> {
    prop::array::uniform2(-10.0..10.0f64)
}

fn direction() -> impl Strategy<Value = FluxDirection> {
    prop_oneof![Just(FluxDirection::Normal), Just(FluxDirection::Tangential)]
}

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= 1e-12 * (1.0 + b[0].abs()) && (a[1] - b[1]).abs() <= 1e-12 * (1.0 + b[1].abs())
}

proptest! {
    #[test]
    fn vector_flux_is_consistent(fam in 0..4usize, lambda in 0.0..5.0f64, g in -10.0..10.0f64, u in vec2(), th in 0.0..6.3f64, dir in direction()) {
        let n = unit(th);
        let spec = FluxSpec { family: FAMILIES[fam], lambda };
        let f = vector_numerical_flux(&spec, g, g, u, u, n, dir).unwrap();
        let m = match dir { FluxDirection::Normal => n, FluxDirection::Tangential => [-n[1], n[0]] };
        prop_assert!(close(f, [g * m[0], g * m[1]]));
    }

    #[test]
    fn vector_flux_is_conservative(fam in 0..4usize, lambda in 0.0..5.0f64, gl in -10.0..10.0f64, gr in -10.0..10.0f64,
                                   ul in vec2(), ur in vec2(), th in 0.0..6.3f64, dir in direction()) {
        let n = unit(th);
        let spec = FluxSpec { family: FAMILIES[fam], lambda };
        let f = vector_numerical_flux(&spec, gl, gr, ul, ur, n, dir).unwrap();
        let b = vector_numerical_flux(&spec, gr, gl, ur, ul, [-n[0], -n[1]], dir).unwrap();
        prop_assert!(close(f, [-b[0], -b[1]]));
    }

    #[test]
    fn diffusion_is_dissipative_and_restricted(lambda in 0.0..5.0f64, ul in vec2(), ur in vec2(), th in 0.0..6.3f64) {
        let n = unit(th);
        let d = [ul[0] - ur[0], ul[1] - ur[1]];
        let diffusion = |fam: FluxFamily| {
            let spec = FluxSpec { family: fam, lambda };
            vector_numerical_flux(&spec, 0.0, 0.0, ul, ur, n, FluxDirection::Normal).unwrap()
        };
        for fam in FAMILIES {
            let q = diffusion(fam);
            prop_assert!(q[0] * d[0] + q[1] * d[1] >= -1e-12);
        }
        let tn = diffusion(FluxFamily::LfNormalDiffusion);
        prop_assert!((tn[0] * n[1] - tn[1] * n[0]).abs() <= 1e-10);
        let tt = diffusion(FluxFamily::LfTangentialDiffusion);
        prop_assert!((tt[0] * n[0] + tt[1] * n[1]).abs() <= 1e-10);
        let lf = diffusion(FluxFamily::LaxFriedrich);
        prop_assert!(close([tn[0] + tt[0], tn[1] + tt[1]], lf));
    }

    #[test]
    fn godunov_matches_the_restricted_diffusion_flux(c in 0.1..3.0f64, gl in -5.0..5.0f64, gr in -5.0..5.0f64,
                                                      ul in vec2(), ur in vec2(), th in 0.0..6.3f64) {
        let n = unit(th);
        for (sys, fam) in [(SystemDef::Wave { c }, FluxFamily::LfNormalDiffusion), (SystemDef::Maxwell { c }, FluxFamily::LfTangentialDiffusion)] {
            let god = FluxSpec::for_system(FluxFamily::Godunov, &sys);
            let lf = FluxSpec::for_system(fam, &sys);
            let a = vector_numerical_flux(&god, gl, gr, ul, ur, n, sys.direction()).unwrap();
            let b = vector_numerical_flux(&lf, gl, gr, ul, ur, n, sys.direction()).unwrap();
            prop_assert!(close(a, b));
            prop_assert!(god.preserves_constraint(&sys) && lf.preserves_constraint(&sys));
        }
    }

    #[test]
    fn scalar_flux_is_conservative(c in 0.1..3.0f64, pl in -5.0..5.0f64, pr in -5.0..5.0f64, ul in vec2(), ur in vec2(), th in 0.0..6.3f64) {
        let n = unit(th);
        for sys in [SystemDef::Wave { c }, SystemDef::Maxwell { c }] {
            let spec = FluxSpec::for_system(FluxFamily::Godunov, &sys);
            let f = scalar_numerical_flux(&sys, &spec, (pl, ul), (pr, ur), n).unwrap();
            let b = scalar_numerical_flux(&sys, &spec, (pr, ur), (pl, ul), [-n[0], -n[1]]).unwrap();
            prop_assert!((f + b).abs() <= 1e-12 * (1.0 + f.abs()));
        }
    }

    #[test]
    fn non_unit_normals_are_rejected(scale in prop_oneof![0.0..0.999f64, 1.001..3.0f64], th in 0.0..6.3f64) {
        let n = [scale * th.cos(), scale * th.sin()];
        let spec = FluxSpec { family: FluxFamily::Godunov, lambda: 1.0 };
        prop_assert!(vector_numerical_flux(&spec, 0.0, 0.0, [0.0; 2], [0.0; 2], n, FluxDirection::Normal).is_err());
        let sys = SystemDef::Wave { c: 1.0 };
        prop_assert!(scalar_numerical_flux(&sys, &spec, (0.0, [0.0; 2]), (0.0, [0.0; 2]), n).is_err());
    }
}

#[test]
fn lax_friedrich_preserves_neither_constraint() {
    for sys in [SystemDef::Wave { c: 1.0 }, SystemDef::Maxwell { c: 1.0 }] {
        assert!(!FluxSpec::for_system(FluxFamily::LaxFriedrich, &sys).preserves_constraint(&sys));
    }
    let wave = SystemDef::Wave { c: 1.0 };
    assert!(!FluxSpec::for_system(FluxFamily::LfTangentialDiffusion, &wave).preserves_constraint(&wave));
}

#[test]
fn induction_has_no_scalar_flux() {
    let sys = SystemDef::Induction { b: AdvectingField::Constant([1.0, 0.0]) };
    let spec = FluxSpec::for_system(FluxFamily::Godunov, &sys);
    assert!(scalar_numerical_flux(&sys, &spec, (0.0, [0.0; 2]), (0.0, [0.0; 2]), [1.0, 0.0]).is_err());
}
