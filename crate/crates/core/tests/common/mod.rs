#![allow(dead_code)]

use std::sync::Arc;

use dgcomplex::mesh::{generate_cartesian, generate_perturbed_quad, split_into_triangles, Mesh};
use dgcomplex::spaces::{Field, FiniteElementSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cartesian(n: usize) -> Arc<Mesh> {
    Arc::new(generate_cartesian(n, n, 1.0, 1.0).unwrap())
}

pub fn perturbed(n: usize) -> Arc<Mesh> {
    Arc::new(generate_perturbed_quad(n, n, 0.2, 42).unwrap())
}

pub fn triangles(n: usize) -> Arc<Mesh> {
    Arc::new(split_into_triangles(&generate_perturbed_quad(n, n, 0.2, 42).unwrap(), 42).unwrap())
}

pub fn cartesian_triangles(n: usize) -> Arc<Mesh> {
    Arc::new(split_into_triangles(&generate_cartesian(n, n, 1.0, 1.0).unwrap(), 7).unwrap())
}

/// The three coarse test meshes with their names.
pub fn coarse_meshes(n: usize) -> Vec<(&'static str, Arc<Mesh>)> {
    vec![("cartesian", cartesian(n)), ("perturbed", perturbed(n)), ("triangles", triangles(n))]
}

pub fn random_field(space: &Arc<FiniteElementSpace>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (0..space.ndofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(space, c).unwrap()
}

pub fn mass_norm(f: &Field) -> f64 {
    f.space.mass().unwrap().inner(&f.coeffs, &f.coeffs).sqrt()
}

pub fn diff_norm(a: &Field, b: &Field) -> f64 {
    let d: Vec<f64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    a.space.mass().unwrap().inner(&d, &d).sqrt()
}
