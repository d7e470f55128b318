//! Structured generators for the four canonical domains.

use std::f64::consts::PI;

use super::{cell_orientation, Mesh, Orientation};
use crate::error::{Error, Result};

fn require(cond: bool, message: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(message()))
    }
}

/// Flips cells so every signed volume is positive.
pub(super) fn orient_cells(dim: usize, coords: &[f64], cells: &mut [usize]) {
    for cell in cells.chunks_mut(dim + 1) {
        if let Orientation::Inverted = cell_orientation(dim, coords, cell) {
            cell.swap(0, 1);
        }
    }
}

/// Unit square (0,1)² with `n` subdivisions per side, every sub-square cut
/// along its (0,0)-(1,1) diagonal.
pub fn generate_unit_square(n: usize) -> Result<Mesh> {
    require(n >= 1, || format!("unit square needs n >= 1, got {n}"))?;
    let stride = n + 1;
    let mut coords = Vec::with_capacity(2 * stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            coords.push(i as f64 / n as f64);
            coords.push(j as f64 / n as f64);
        }
    }
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            cells.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
        }
    }
    Mesh::new(2, coords, cells)
}

/// L-shaped domain (-1,1)² \ [0,1)² with `n` subdivisions per unit length.
///
/// The reentrant corner sits at the origin, which is always a mesh vertex.
pub fn generate_lshape(n: usize) -> Result<Mesh> {
    require(n >= 1, || format!("L-shape needs n >= 1, got {n}"))?;
    let side = 2 * n;
    let kept = |i: usize, j: usize| !(i >= n && j >= n);
    let mut index = vec![usize::MAX; (side + 1) * (side + 1)];
    let mut coords = Vec::new();
    let mut next = 0;
    for j in 0..=side {
        for i in 0..=side {
            let touches = [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                .iter()
                .any(|&(ci, cj)| ci < side && cj < side && kept(ci, cj));
            if touches {
                index[j * (side + 1) + i] = next;
                next += 1;
                coords.push(-1.0 + i as f64 / n as f64);
                coords.push(-1.0 + j as f64 / n as f64);
            }
        }
    }
    let mut cells = Vec::new();
    for j in 0..side {
        for i in 0..side {
            if !kept(i, j) {
                continue;
            }
            let at = |di: usize, dj: usize| index[(j + dj) * (side + 1) + i + di];
            let (v00, v10, v01, v11) = (at(0, 0), at(1, 0), at(0, 1), at(1, 1));
            cells.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
        }
    }
    Mesh::new(2, coords, cells)
}

/// Regular `m`-gon inscribed in the unit circle.
///
/// Interior points sit on `max(1, m/6)` concentric rings; ring `j` of `R` has
/// radius `j/R` and `floor(m j / R)` points (at least 3), and neighbouring rings are
/// stitched by advancing along whichever ring has the smaller next angle.
pub fn generate_disk(m: usize) -> Result<Mesh> {
    require(m >= 3, || format!("disk needs at least 3 boundary segments, got {m}"))?;
    let rings = (m / 6).max(1);
    let mut coords = vec![0.0, 0.0];
    let mut ring_start = Vec::with_capacity(rings);
    let mut ring_size = Vec::with_capacity(rings);
    for j in 1..=rings {
        let count = if j == rings {
            m
        } else {
            (m * j / rings).max(3)
        };
        ring_start.push(coords.len() / 2);
        ring_size.push(count);
        let radius = j as f64 / rings as f64;
        for i in 0..count {
            let angle = 2.0 * PI * i as f64 / count as f64;
            if j == rings {
                coords.push(angle.cos());
                coords.push(angle.sin());
            } else {
                coords.push(radius * angle.cos());
                coords.push(radius * angle.sin());
            }
        }
    }
    let mut cells = Vec::new();
    // Center fan.
    for i in 0..ring_size[0] {
        let a = ring_start[0] + i;
        let b = ring_start[0] + (i + 1) % ring_size[0];
        cells.extend_from_slice(&[0, a, b]);
    }
    for r in 1..rings {
        let (inner_start, inner_n) = (ring_start[r - 1], ring_size[r - 1]);
        let (outer_start, outer_n) = (ring_start[r], ring_size[r]);
        let inner = |i: usize| inner_start + i % inner_n;
        let outer = |o: usize| outer_start + o % outer_n;
        let (mut i, mut o) = (0, 0);
        while i < inner_n || o < outer_n {
            // Compare (i+1)/inner_n against (o+1)/outer_n without rounding.
            let advance_inner = o == outer_n || (i < inner_n && (i + 1) * outer_n < (o + 1) * inner_n);
            if advance_inner {
                cells.extend_from_slice(&[inner(i), inner(i + 1), outer(o)]);
                i += 1;
            } else {
                cells.extend_from_slice(&[inner(i), outer(o), outer(o + 1)]);
                o += 1;
            }
        }
    }
    orient_cells(2, &coords, &mut cells);
    Mesh::new(2, coords, cells)
}

/// Unit cube (0,1)³ with `n` subdivisions per side; each sub-cube is split
/// into the six Kuhn tetrahedra sharing its main diagonal.
pub fn generate_unit_cube(n: usize) -> Result<Mesh> {
    require(n >= 1, || format!("unit cube needs n >= 1, got {n}"))?;
    let s = n + 1;
    let id = |i: usize, j: usize, k: usize| (k * s + j) * s + i;
    let mut coords = Vec::with_capacity(3 * s * s * s);
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                coords.extend_from_slice(&[i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMUTATIONS {
                    let mut p = [i, j, k];
                    let mut tet = [id(p[0], p[1], p[2]); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        p[axis] += 1;
                        tet[step + 1] = id(p[0], p[1], p[2]);
                    }
                    cells.extend_from_slice(&tet);
                }
            }
        }
    }
    orient_cells(3, &coords, &mut cells);
    Mesh::new(3, coords, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m1 = generate_unit_square(1).unwrap();
        assert_eq!((m1.n_cells(), m1.n_vertices(), m1.boundary_facets().len()), (2, 4, 4));
        let m2 = generate_unit_square(2).unwrap();
        assert_eq!((m2.n_cells(), m2.n_vertices(), m2.boundary_facets().len()), (8, 9, 8));
        let m4 = generate_unit_square(4).unwrap();
        assert!((m4.total_volume() - 1.0).abs() < 1e-14);
        assert!((m4.h() - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(generate_unit_square(0).is_err());
    }

    #[test]
    fn lshape_area_corner_and_boundary() {
        let m1 = generate_lshape(1).unwrap();
        assert!((m1.total_volume() - 3.0).abs() < 1e-14);
        assert!((0..m1.n_vertices()).any(|v| m1.vertex(v) == [0.0, 0.0]));
        assert!(generate_lshape(0).is_err());

        // Six boundary segments of the L: each as (fixed coordinate axis, value, range).
        let segments: [(usize, f64, f64, f64); 6] = [
            (1, -1.0, -1.0, 1.0),
            (0, 1.0, -1.0, 0.0),
            (1, 0.0, 0.0, 1.0),
            (0, 0.0, 0.0, 1.0),
            (1, 1.0, -1.0, 0.0),
            (0, -1.0, -1.0, 1.0),
        ];
        let m2 = generate_lshape(2).unwrap();
        for f in m2.boundary_facets() {
            let on_segment = segments.iter().any(|&(axis, value, lo, hi)| {
                f.vertices().iter().all(|&v| {
                    let x = m2.vertex(v);
                    (x[axis] - value).abs() < 1e-14 && x[1 - axis] >= lo - 1e-14 && x[1 - axis] <= hi + 1e-14
                })
            });
            assert!(on_segment, "facet {:?} off the boundary", f.vertices());
        }
        assert!((m2.boundary_measure() - 8.0).abs() < 1e-13);
    }

    fn min_angle_deg(mesh: &Mesh) -> f64 {
        let mut min: f64 = 180.0;
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            for i in 0..3 {
                let p = mesh.vertex(cell[i]);
                let a = mesh.vertex(cell[(i + 1) % 3]);
                let b = mesh.vertex(cell[(i + 2) % 3]);
                let (u, v) = ([a[0] - p[0], a[1] - p[1]], [b[0] - p[0], b[1] - p[1]]);
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min = min.min(cos.acos().to_degrees());
            }
        }
        min
    }

    #[test]
    fn disk_geometry() {
        let m3 = generate_disk(3).unwrap();
        assert!((m3.total_volume() - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12);
        let m64 = generate_disk(64).unwrap();
        let polygon = 32.0 * (2.0 * PI / 64.0).sin();
        assert!((m64.total_volume() - polygon).abs() < 1e-12);
        assert!((m64.total_volume() - PI).abs() / PI < 5e-3);
        assert!(generate_disk(2).is_err());
        for m in [3, 4, 5, 7, 12, 17, 64, 100, 281] {
            let mesh = generate_disk(m).unwrap();
            assert_eq!(mesh.boundary_facets().len(), m);
            for v in mesh.boundary_vertices() {
                let x = mesh.vertex(v);
                assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-14);
            }
            let area = m as f64 / 2.0 * (2.0 * PI / m as f64).sin();
            assert!((mesh.total_volume() - area).abs() < 1e-12);
            assert!(min_angle_deg(&mesh) >= 20.0, "m={m}: min angle {}", min_angle_deg(&mesh));
        }
    }

    #[test]
    fn unit_cube_counts() {
        let m1 = generate_unit_cube(1).unwrap();
        assert_eq!((m1.n_cells(), m1.n_vertices()), (6, 8));
        let m2 = generate_unit_cube(2).unwrap();
        assert_eq!(m2.n_cells(), 48);
        assert!((m2.total_volume() - 1.0).abs() < 1e-14);
        assert_eq!(m2.boundary_facets().len(), 48);
        assert!((m2.boundary_measure() - 6.0).abs() < 1e-13);
        assert!(generate_unit_cube(0).is_err());
    }
}
