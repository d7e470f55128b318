//! Lagrange shape functions of degree 1 and 2 in barycentric coordinates.

/// Local edges of an `s`-simplex, lexicographic in vertex pairs.
pub(crate) fn local_edges(simplex_dim: usize) -> &'static [(usize, usize)] {
    match simplex_dim {
        1 => &[(0, 1)],
        2 => &[(0, 1), (0, 2), (1, 2)],
        3 => &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        _ => &[],
    }
}

/// Number of Lagrange nodes of degree `k` on an `s`-simplex.
pub(crate) fn nodes_per_simplex(simplex_dim: usize, degree: usize) -> usize {
    match degree {
        1 => simplex_dim + 1,
        _ => simplex_dim + 1 + local_edges(simplex_dim).len(),
    }
}

/// Shape function values at barycentric point `lam`. Vertex functions
/// first, then edge functions in [`local_edges`] order.
pub(crate) fn values(simplex_dim: usize, degree: usize, lam: &[f64; 4], out: &mut [f64]) {
    let nv = simplex_dim + 1;
    if degree == 1 {
        out[..nv].copy_from_slice(&lam[..nv]);
        return;
    }
    for i in 0..nv {
        out[i] = lam[i] * (2.0 * lam[i] - 1.0);
    }
    for (e, &(i, j)) in local_edges(simplex_dim).iter().enumerate() {
        out[nv + e] = 4.0 * lam[i] * lam[j];
    }
}

/// Derivatives of the shape functions with respect to each barycentric
/// coordinate: `out[a][b] = ∂N_a/∂λ_b`.
pub(crate) fn barycentric_derivatives(simplex_dim: usize, degree: usize, lam: &[f64; 4], out: &mut [[f64; 4]]) {
    let nv = simplex_dim + 1;
    for row in out.iter_mut() {
        *row = [0.0; 4];
    }
    if degree == 1 {
        for (i, row) in out.iter_mut().enumerate().take(nv) {
            row[i] = 1.0;
        }
        return;
    }
    for (i, row) in out.iter_mut().enumerate().take(nv) {
        row[i] = 4.0 * lam[i] - 1.0;
    }
    for (e, &(i, j)) in local_edges(simplex_dim).iter().enumerate() {
        out[nv + e][i] = 4.0 * lam[j];
        out[nv + e][j] = 4.0 * lam[i];
    }
}

/// Gradients of the barycentric coordinates of a cell, `grads[a]` for
/// vertex `a`, plus the cell measure.
pub(crate) fn barycentric_gradients(dim: usize, points: &[&[f64]]) -> ([[f64; 3]; 4], f64) {
    let mut grads = [[0.0; 3]; 4];
    if dim == 2 {
        let (x0, x1, x2) = (points[0], points[1], points[2]);
        let j = [[x1[0] - x0[0], x2[0] - x0[0]], [x1[1] - x0[1], x2[1] - x0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // Rows of J⁻¹ are ∇λ1, ∇λ2.
        grads[1] = [j[1][1] / det, -j[0][1] / det, 0.0];
        grads[2] = [-j[1][0] / det, j[0][0] / det, 0.0];
        grads[0] = [-grads[1][0] - grads[2][0], -grads[1][1] - grads[2][1], 0.0];
        (grads, 0.5 * det)
    } else {
        let x0 = points[0];
        let col = |p: &[f64]| [p[0] - x0[0], p[1] - x0[1], p[2] - x0[2]];
        let (a, b, c) = (col(points[1]), col(points[2]), col(points[3]));
        // J = [a b c] as columns; rows of J⁻¹ are (b×c, c×a, a×b) / det.
        let cross = |u: [f64; 3], v: [f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let bc = cross(b, c);
        let det = a[0] * bc[0] + a[1] * bc[1] + a[2] * bc[2];
        let rows = [bc, cross(c, a), cross(a, b)];
        for (k, r) in rows.iter().enumerate() {
            grads[k + 1] = [r[0] / det, r[1] / det, r[2] / det];
        }
        for i in 0..3 {
            grads[0][i] = -(grads[1][i] + grads[2][i] + grads[3][i]);
        }
        (grads, det / 6.0)
    }
}
