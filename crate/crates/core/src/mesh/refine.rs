use std::collections::HashMap;

use super::Mesh;

/// Uniform refinement: triangles split into 4 through edge midpoints,
/// tetrahedra into 8 (red refinement, octahedron cut along its shortest
/// diagonal).
///
/// New boundary vertices are edge midpoints, so the refined mesh covers
/// exactly the same polygon or polyhedron.
pub fn uniform_refine(mesh: &Mesh) -> Mesh {
    let dim = mesh.dim();
    let mut coords = mesh.coords().to_vec();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.n_cells() * 2);
    let mut midpoint = |a: usize, b: usize, coords: &mut Vec<f64>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let id = coords.len() / dim;
            for i in 0..dim {
                let x = 0.5 * (coords[a * dim + i] + coords[b * dim + i]);
                coords.push(x);
            }
            id
        })
    };
    let children = if dim == 2 { 4 } else { 8 };
    let mut cells = Vec::with_capacity(mesh.cells().len() * children);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        if dim == 2 {
            let (a, b, c2) = (cell[0], cell[1], cell[2]);
            let ab = midpoint(a, b, &mut coords);
            let bc = midpoint(b, c2, &mut coords);
            let ca = midpoint(c2, a, &mut coords);
            cells.extend_from_slice(&[a, ab, ca, ab, b, bc, ca, bc, c2, ab, bc, ca]);
        } else {
            let x = [cell[0], cell[1], cell[2], cell[3]];
            let mut m = [[usize::MAX; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    let id = midpoint(x[i], x[j], &mut coords);
                    m[i][j] = id;
                    m[j][i] = id;
                }
            }
            cells.extend_from_slice(&[x[0], m[0][1], m[0][2], m[0][3]]);
            cells.extend_from_slice(&[m[0][1], x[1], m[1][2], m[1][3]]);
            cells.extend_from_slice(&[m[0][2], m[1][2], x[2], m[2][3]]);
            cells.extend_from_slice(&[m[0][3], m[1][3], m[2][3], x[3]]);
            // The inner octahedron has three diagonals joining opposite edge
            // midpoints; cut along the shortest one.
            let diagonals = [(m[0][2], m[1][3]), (m[0][1], m[2][3]), (m[0][3], m[1][2])];
            let length = |(p, q): (usize, usize)| -> f64 {
                (0..3).map(|i| (coords[p * 3 + i] - coords[q * 3 + i]).powi(2)).sum::<f64>()
            };
            let mut best = 0;
            for k in 1..3 {
                if length(diagonals[k]) < length(diagonals[best]) - 1e-14 {
                    best = k;
                }
            }
            let (p, q) = diagonals[best];
            // The four remaining octahedron vertices form a cycle around the diagonal.
            let ring: [usize; 4] = match best {
                0 => [m[0][1], m[1][2], m[2][3], m[0][3]],
                1 => [m[0][2], m[1][2], m[1][3], m[0][3]],
                _ => [m[0][1], m[0][2], m[2][3], m[1][3]],
            };
            for k in 0..4 {
                cells.extend_from_slice(&[p, q, ring[k], ring[(k + 1) % 4]]);
            }
        }
    }
    super::generate::orient_cells(dim, &coords, &mut cells);
    Mesh::new(dim, coords, cells).expect("refinement of a valid mesh is valid")
}
