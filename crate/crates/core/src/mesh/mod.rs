//! Simplicial meshes (triangles in 2D, tetrahedra in 3D).
//!
//! A [`Mesh`] is immutable once built. Cells are stored positively oriented
//! and the boundary facets, their outward normals and the per-cell diameters
//! are derived at construction time.

mod generate;
mod io;
mod refine;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_disk, generate_lshape, generate_unit_cube, generate_unit_square};
pub use io::{read_mesh, write_mesh};
pub use refine::uniform_refine;

/// A facet lying on the domain boundary, with its unique adjacent cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    vertices: [usize; 3],
    arity: usize,
    /// Index of the only cell containing this facet.
    pub cell: usize,
    /// Outward unit normal; the unused trailing component is zero in 2D.
    pub normal: [f64; 3],
    /// Length (2D) or area (3D) of the facet.
    pub measure: f64,
}

impl BoundaryFacet {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices[..self.arity]
    }
}

/// Simplicial mesh of a polygonal or polyhedral domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    cell_diameters: Vec<f64>,
    h: f64,
    boundary_facets: Vec<BoundaryFacet>,
    repaired_cells: usize,
}

/// Stable key for a facet or edge: its vertex indices, sorted, padded with `usize::MAX`.
pub(crate) fn sorted_key(vertices: &[usize]) -> [usize; 3] {
    let mut key = [usize::MAX; 3];
    key[..vertices.len()].copy_from_slice(vertices);
    key[..vertices.len()].sort_unstable();
    key
}

/// Signed measure of a simplex given its vertex coordinates.
pub(crate) fn signed_measure(dim: usize, points: &[&[f64]]) -> f64 {
    match dim {
        2 => {
            let (a, b, c) = (points[0], points[1], points[2]);
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        }
        3 => {
            let (a, b, c, d) = (points[0], points[1], points[2], points[3]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
            let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
                + u[2] * (v[0] * w[1] - v[1] * w[0]);
            det / 6.0
        }
        _ => unreachable!("dimension checked at construction"),
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Outcome of checking one cell's orientation.
pub(crate) enum Orientation {
    Positive,
    Inverted,
    Degenerate,
}

pub(crate) fn cell_orientation(dim: usize, coords: &[f64], cell: &[usize]) -> Orientation {
    let points: Vec<&[f64]> = cell.iter().map(|&v| &coords[v * dim..(v + 1) * dim]).collect();
    let vol = signed_measure(dim, &points);
    let mut diam: f64 = 0.0;
    for i in 0..cell.len() {
        for j in i + 1..cell.len() {
            diam = diam.max(distance(points[i], points[j]));
        }
    }
    if !(vol.abs() > 1e-13 * diam.powi(dim as i32)) {
        Orientation::Degenerate
    } else if vol > 0.0 {
        Orientation::Positive
    } else {
        Orientation::Inverted
    }
}

impl Mesh {
    /// Builds a mesh from flat coordinate and connectivity arrays.
    ///
    /// Inverted cells are repaired by swapping their first two vertices; the
    /// number of repairs is available through [`Mesh::repaired_cells`].
    pub fn new(dim: usize, coords: Vec<f64>, cells: Vec<usize>) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("mesh dimension must be 2 or 3, got {dim}")));
        }
        if coords.len() % dim != 0 || cells.len() % (dim + 1) != 0 {
            return Err(Error::InvalidMesh("coordinate or connectivity array has ragged length".into()));
        }
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        let nv = coords.len() / dim;
        if let Some(&bad) = cells.iter().find(|&&v| v >= nv) {
            return Err(Error::InvalidMesh(format!("vertex index {bad} out of range ({nv} vertices)")));
        }
        let mut cells = cells;
        let mut repaired = 0;
        for (c, cell) in cells.chunks_mut(dim + 1).enumerate() {
            match cell_orientation(dim, &coords, cell) {
                Orientation::Positive => {}
                Orientation::Inverted => {
                    cell.swap(0, 1);
                    repaired += 1;
                }
                Orientation::Degenerate => {
                    return Err(Error::InvalidMesh(format!("cell {c} has zero volume")));
                }
            }
        }
        let mut mesh = Mesh {
            dim,
            coords,
            cells,
            cell_diameters: Vec::new(),
            h: 0.0,
            boundary_facets: Vec::new(),
            repaired_cells: repaired,
        };
        mesh.cell_diameters = (0..mesh.n_cells())
            .map(|c| {
                let cell = mesh.cell(c);
                let mut d: f64 = 0.0;
                for i in 0..cell.len() {
                    for j in i + 1..cell.len() {
                        d = d.max(distance(mesh.vertex(cell[i]), mesh.vertex(cell[j])));
                    }
                }
                d
            })
            .collect();
        mesh.h = mesh.cell_diameters.iter().copied().fold(0.0, f64::max);
        mesh.boundary_facets = mesh.find_boundary_facets()?;
        Ok(mesh)
    }

    fn find_boundary_facets(&self) -> Result<Vec<BoundaryFacet>> {
        let dim = self.dim;
        // key -> (occurrences, cell, local facet index)
        let mut seen: HashMap<[usize; 3], (usize, usize, usize)> = HashMap::with_capacity(self.n_cells() * 2);
        let mut order: Vec<[usize; 3]> = Vec::new();
        let mut facet = [0usize; 3];
        for c in 0..self.n_cells() {
            let cell = self.cell(c);
            for local in 0..=dim {
                let mut k = 0;
                for (i, &v) in cell.iter().enumerate() {
                    if i != local {
                        facet[k] = v;
                        k += 1;
                    }
                }
                let key = sorted_key(&facet[..dim]);
                let entry = seen.entry(key).or_insert_with(|| {
                    order.push(key);
                    (0, c, local)
                });
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(Error::InvalidMesh(format!("facet {:?} shared by more than two cells", &key[..dim])));
                }
            }
        }
        let mut facets = Vec::new();
        for key in order {
            let (count, c, local) = seen[&key];
            if count != 1 {
                continue;
            }
            let cell = self.cell(c);
            let mut vertices = [usize::MAX; 3];
            let mut k = 0;
            // Keep the cyclic order of the cell so 2D facets run counter-clockwise.
            for i in 1..=dim {
                vertices[k] = cell[(local + i) % (dim + 1)];
                k += 1;
            }
            facets.push(self.make_facet(vertices, c));
        }
        Ok(facets)
    }

    fn make_facet(&self, vertices: [usize; 3], cell: usize) -> BoundaryFacet {
        let dim = self.dim;
        let mut facet_centroid = [0.0; 3];
        for &v in &vertices[..dim] {
            for (i, x) in self.vertex(v).iter().enumerate() {
                facet_centroid[i] += x / dim as f64;
            }
        }
        let cell_centroid = self.cell_centroid(cell);
        let (mut normal, measure) = if dim == 2 {
            let a = self.vertex(vertices[0]);
            let b = self.vertex(vertices[1]);
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = t[0].hypot(t[1]);
            ([t[1] / len, -t[0] / len, 0.0], len)
        } else {
            let a = self.vertex(vertices[0]);
            let b = self.vertex(vertices[1]);
            let c = self.vertex(vertices[2]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            ([n[0] / len, n[1] / len, n[2] / len], 0.5 * len)
        };
        let outward: f64 = (0..dim).map(|i| normal[i] * (facet_centroid[i] - cell_centroid[i])).sum();
        if outward < 0.0 {
            normal.iter_mut().for_each(|x| *x = -*x);
        }
        BoundaryFacet { vertices, arity: dim, cell, normal, measure }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        self.cell_diameters[c]
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    /// Number of inverted cells that were flipped while building the mesh.
    pub fn repaired_cells(&self) -> usize {
        self.repaired_cells
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let points: Vec<&[f64]> = self.cell(c).iter().map(|&v| self.vertex(v)).collect();
        signed_measure(self.dim, &points)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn boundary_measure(&self) -> f64 {
        self.boundary_facets.iter().map(|f| f.measure).sum()
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 3] {
        let mut centroid = [0.0; 3];
        let cell = self.cell(c);
        for &v in cell {
            for (i, x) in self.vertex(v).iter().enumerate() {
                centroid[i] += x / cell.len() as f64;
            }
        }
        centroid
    }

    /// Sorted, deduplicated list of vertices lying on a boundary facet.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on_boundary = vec![false; self.n_vertices()];
        for f in &self.boundary_facets {
            for &v in f.vertices() {
                on_boundary[v] = true;
            }
        }
        (0..self.n_vertices()).filter(|&v| on_boundary[v]).collect()
    }

    /// Largest interior corner angle of the domain in radians.
    ///
    /// In 2D this is the largest angle at a boundary vertex, in 3D the largest
    /// dihedral angle along a boundary edge. Flat points (angle π) are not
    /// corners; a boundary without corners reports π.
    pub fn largest_interior_angle(&self) -> f64 {
        if self.dim == 2 {
            let mut angle = vec![0.0; self.n_vertices()];
            for c in 0..self.n_cells() {
                let cell = self.cell(c);
                for i in 0..3 {
                    let p = self.vertex(cell[i]);
                    let a = self.vertex(cell[(i + 1) % 3]);
                    let b = self.vertex(cell[(i + 2) % 3]);
                    angle[cell[i]] += vector_angle(&[a[0] - p[0], a[1] - p[1], 0.0], &[b[0] - p[0], b[1] - p[1], 0.0]);
                }
            }
            largest_corner(self.boundary_vertices().into_iter().map(|v| angle[v]))
        } else {
            let mut boundary_edges: HashMap<[usize; 3], f64> = HashMap::new();
            for f in &self.boundary_facets {
                let v = f.vertices();
                for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])] {
                    boundary_edges.insert(sorted_key(&[a, b]), 0.0);
                }
            }
            for c in 0..self.n_cells() {
                let cell = self.cell(c);
                for i in 0..4 {
                    for j in i + 1..4 {
                        let key = sorted_key(&[cell[i], cell[j]]);
                        if let Some(total) = boundary_edges.get_mut(&key) {
                            let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).map(|k| cell[k]).collect();
                            *total += self.dihedral_angle(cell[i], cell[j], others[0], others[1]);
                        }
                    }
                }
            }
            largest_corner(boundary_edges.values().copied())
        }
    }

    fn dihedral_angle(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let pa = self.vertex(a);
        let sub = |p: &[f64]| [p[0] - pa[0], p[1] - pa[1], p[2] - pa[2]];
        let e = sub(self.vertex(b));
        let elen2 = e.iter().map(|x| x * x).sum::<f64>();
        let reject = |w: [f64; 3]| {
            let t = (w[0] * e[0] + w[1] * e[1] + w[2] * e[2]) / elen2;
            [w[0] - t * e[0], w[1] - t * e[1], w[2] - t * e[2]]
        };
        vector_angle(&reject(sub(self.vertex(c))), &reject(sub(self.vertex(d))))
    }
}

fn largest_corner(angles: impl Iterator<Item = f64>) -> f64 {
    angles
        .filter(|a| (a - std::f64::consts::PI).abs() > 1e-9)
        .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |m| m.max(a))))
        .unwrap_or(std::f64::consts::PI)
}

fn vector_angle(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
}

/// The canonical test domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Square,
    Lshape,
    Disk,
    Cube,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::Lshape => "lshape",
            Domain::Disk => "disk",
            Domain::Cube => "cube",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Domain::Cube => 3,
            _ => 2,
        }
    }

    /// Largest interior angle of the exact domain; π for the smooth disk.
    pub fn largest_interior_angle(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Domain::Square | Domain::Cube => PI / 2.0,
            Domain::Lshape => 1.5 * PI,
            Domain::Disk => PI,
        }
    }

    /// Generates the mesh for a level parameter: subdivisions per unit
    /// length, or boundary segments for the disk.
    pub fn generate(self, level: usize) -> Result<Mesh> {
        match self {
            Domain::Square => generate_unit_square(level),
            Domain::Lshape => generate_lshape(level),
            Domain::Disk => generate_disk(level),
            Domain::Cube => generate_unit_cube(level),
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Domain> {
        match s {
            "square" => Ok(Domain::Square),
            "lshape" => Ok(Domain::Lshape),
            "disk" => Ok(Domain::Disk),
            "cube" => Ok(Domain::Cube),
            other => Err(Error::InvalidArgument(format!("unknown domain '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(mesh: &Mesh) {
        for c in 0..mesh.n_cells() {
            assert!(mesh.cell_volume(c) > 0.0);
            assert!(mesh.cell_diameter(c) > 0.0);
        }
        let max_diam = (0..mesh.n_cells()).map(|c| mesh.cell_diameter(c)).fold(0.0, f64::max);
        assert_eq!(mesh.h(), max_diam);
        for f in mesh.boundary_facets() {
            let norm = f.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            let cc = mesh.cell_centroid(f.cell);
            let mut fc = [0.0; 3];
            for &v in f.vertices() {
                for (i, x) in mesh.vertex(v).iter().enumerate() {
                    fc[i] += x / mesh.dim() as f64;
                }
            }
            let dot: f64 = (0..mesh.dim()).map(|i| f.normal[i] * (fc[i] - cc[i])).sum();
            assert!(dot > 0.0);
        }
    }

    #[test]
    fn generated_meshes_satisfy_invariants() {
        for mesh in [
            generate_unit_square(3).unwrap(),
            generate_lshape(2).unwrap(),
            generate_disk(17).unwrap(),
            generate_unit_cube(2).unwrap(),
        ] {
            check_invariants(&mesh);
        }
    }

    #[test]
    fn interior_facets_shared_by_two_cells() {
        let mesh = generate_unit_cube(2).unwrap();
        let mut counts: HashMap<[usize; 3], usize> = HashMap::new();
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            for skip in 0..4 {
                let f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| cell[i]).collect();
                *counts.entry(sorted_key(&f)).or_default() += 1;
            }
        }
        let boundary = counts.values().filter(|&&n| n == 1).count();
        assert_eq!(boundary, mesh.boundary_facets().len());
        assert!(counts.values().all(|&n| n == 1 || n == 2));
    }

    #[test]
    fn inverted_cell_is_repaired() {
        let coords = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let mesh = Mesh::new(2, coords, vec![0, 2, 1]).unwrap();
        assert_eq!(mesh.repaired_cells(), 1);
        assert!(mesh.cell_volume(0) > 0.0);
    }

    #[test]
    fn degenerate_cell_rejected() {
        let coords = vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
        assert!(matches!(Mesh::new(2, coords, vec![0, 1, 2]), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn interior_angles() {
        use std::f64::consts::PI;
        let square = generate_unit_square(4).unwrap();
        assert!((square.largest_interior_angle() - 0.5 * PI).abs() < 1e-12);
        let lshape = generate_lshape(2).unwrap();
        assert!((lshape.largest_interior_angle() - 1.5 * PI).abs() < 1e-12);
        let cube = generate_unit_cube(2).unwrap();
        assert!((cube.largest_interior_angle() - 0.5 * PI).abs() < 1e-12);
        let disk = generate_disk(12).unwrap();
        assert!((disk.largest_interior_angle() - (PI - 2.0 * PI / 12.0)).abs() < 1e-12);
    }
}
