use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CellKind, Mesh};
use crate::error::{Error, Result};

/// Cell loops of an `nx x ny` grid with the unwrapped corner coordinates,
/// from the unperiodized vertex positions `raw`.
fn grid(nx: usize, ny: usize, lx: f64, ly: f64, raw: &[[f64; 2]]) -> (Vec<Vec<usize>>, Vec<Vec<[f64; 2]>>) {
    let v = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let corner = |i: usize, j: usize| {
        let p = raw[v(i, j)];
        [p[0] + (i / nx) as f64 * lx, p[1] + (j / ny) as f64 * ly]
    };
    let mut cells = Vec::with_capacity(nx * ny);
    let mut coords = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            cells.push(c.iter().map(|&(a, b)| v(a, b)).collect());
            coords.push(c.iter().map(|&(a, b)| corner(a, b)).collect());
        }
    }
    (cells, coords)
}

fn check_counts(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cells per direction, got {nx}x{ny}")));
    }
    Ok(())
}

/// Uniform `nx x ny` grid of axis-aligned rectangles.
pub fn generate_cartesian(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
    check_counts(nx, ny)?;
    let hx = lx / nx as f64;
    let hy = ly / ny as f64;
    let vertices: Vec<[f64; 2]> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| [i as f64 * hx, j as f64 * hy]))
        .collect();
    let (cells, coords) = grid(nx, ny, lx, ly, &vertices);
    Mesh::with_cell_coords(lx, ly, vertices, cells, coords)
}

/// Unit-torus grid whose vertices are displaced by `amplitude * h * U(-1, 1)`
/// in each coordinate.
pub fn generate_perturbed_quad(nx: usize, ny: usize, amplitude: f64, seed: u64) -> Result<Mesh> {
    check_counts(nx, ny)?;
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::InvalidArgument(format!("perturbation amplitude {amplitude} outside [0, 0.5)")));
    }
    let hx = 1.0 / nx as f64;
    let hy = 1.0 / ny as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let mut x = i as f64 * hx;
            let mut y = j as f64 * hy;
            if amplitude > 0.0 {
                x += amplitude * hx * rng.random_range(-1.0..1.0);
                y += amplitude * hy * rng.random_range(-1.0..1.0);
            }
            vertices.push([x, y]);
        }
    }
    let (cells, coords) = grid(nx, ny, 1.0, 1.0, &vertices);
    let mesh = Mesh::with_cell_coords(1.0, 1.0, vertices, cells, coords)?;
    for (ci, cell) in mesh.cells.iter().enumerate() {
        if !is_strictly_convex(&cell.coords) {
            return Err(Error::NonConvexCell { cell: ci });
        }
    }
    Ok(mesh)
}

fn is_strictly_convex(p: &[[f64; 2]]) -> bool {
    let n = p.len();
    (0..n).all(|i| {
        let a = p[i];
        let b = p[(i + 1) % n];
        let c = p[(i + 2) % n];
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}

/// Splits every quad along a randomly chosen diagonal.
pub fn split_into_triangles(mesh: &Mesh, seed: u64) -> Result<Mesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::with_capacity(2 * mesh.n_cells());
    let mut coords = Vec::with_capacity(2 * mesh.n_cells());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        if cell.kind != CellKind::Quad {
            return Err(Error::InvalidArgument(format!("cell {ci} is not a quad")));
        }
        let v = &cell.vertices;
        let c = &cell.coords;
        let mut first_diagonal: bool = rng.random();
        // A diagonal outside a non-convex quad would fold a triangle.
        let ok = |tri: [usize; 3]| super::polygon_area(&[c[tri[0]], c[tri[1]], c[tri[2]]]) > 0.0;
        if first_diagonal && !(ok([0, 1, 2]) && ok([0, 2, 3])) {
            first_diagonal = false;
        } else if !first_diagonal && !(ok([0, 1, 3]) && ok([1, 2, 3])) {
            first_diagonal = true;
        }
        let tris = if first_diagonal { [[0, 1, 2], [0, 2, 3]] } else { [[0, 1, 3], [1, 2, 3]] };
        for t in tris {
            cells.push(t.iter().map(|&i| v[i]).collect());
            coords.push(t.iter().map(|&i| c[i]).collect());
        }
    }
    Mesh::with_cell_coords(mesh.lx, mesh.ly, mesh.vertices.clone(), cells, coords)
}
