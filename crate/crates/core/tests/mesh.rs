use dgcomplex::mesh::*;
use proptest::prelude::*;

fn check(m: &Mesh) -> Result<(), TestCaseError> {
    let r = m.validate();
    prop_assert!(r.passed(), "{:?}", r.failures);
    prop_assert_eq!(r.euler_characteristic, 0);
    prop_assert!(r.incidence.iter().all(|&i| i == 2));
    prop_assert!((r.total_area - m.lx * m.ly).abs() <= 1e-12);
    for s in &m.sides {
        prop_assert!((s.normal[0].hypot(s.normal[1]) - 1.0).abs() <= 1e-12);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_meshes_are_valid_tori(nx in 2..9usize, ny in 2..9usize, amp in 0.0..0.3f64, seed in 0..1000u64) {
        let q = generate_perturbed_quad(nx, ny, amp, seed).unwrap();
        check(&q)?;
        prop_assert_eq!(q.n_cells(), nx * ny);
        let t = split_into_triangles(&q, seed).unwrap();
        check(&t)?;
        prop_assert_eq!(t.n_cells(), 2 * nx * ny);
        prop_assert!(t.is_all_triangles());
    }

    // The text format has no lattice offsets, so it needs edges shorter than
    // half the period; three cells per direction guarantee that here.
    #[test]
    fn text_format_round_trips(nx in 3..7usize, ny in 3..7usize, seed in 0..1000u64) {
        let m = split_into_triangles(&generate_perturbed_quad(nx, ny, 0.2, seed).unwrap(), seed).unwrap();
        let back = load_mesh(&save_mesh(&m)).unwrap();
        prop_assert_eq!(back.n_cells(), m.n_cells());
        prop_assert_eq!(back.n_sides(), m.n_sides());
        for (a, b) in m.cells.iter().zip(&back.cells) {
            prop_assert!((a.area - b.area).abs() <= 1e-12);
            prop_assert_eq!(&a.vertices, &b.vertices);
        }
    }

    #[test]
    fn generation_is_deterministic(n in 2..6usize, seed in 0..1000u64) {
        let a = generate_perturbed_quad(n, n, 0.2, seed).unwrap();
        let b = generate_perturbed_quad(n, n, 0.2, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn cartesian_h_min_is_the_cell_width() {
    let m = generate_cartesian(10, 10, 1.0, 1.0).unwrap();
    assert!((m.h_min() - 0.1).abs() < 1e-14);
    assert!(m.is_all_quads());
}

#[test]
fn malformed_text_is_rejected() {
    assert!(load_mesh("").is_err());
    assert!(load_mesh("not a mesh").is_err());
}

#[test]
fn degenerate_grids_are_rejected() {
    assert!(generate_cartesian(1, 4, 1.0, 1.0).is_err());
    assert!(generate_perturbed_quad(4, 4, 0.5, 1).is_err());
}
