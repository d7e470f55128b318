use super::assembly::assemble_h1_gram;
use super::space::FunctionSpace;
use crate::sparse::{dot, CsrMatrix};

/// Translations then infinitesimal rotations, interpolated and
/// orthonormalized in the H¹ inner product.
pub fn rigid_motion_basis(space: &FunctionSpace) -> Vec<Vec<f64>> {
    let d = space.components();
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        fields.push(space.interpolate(|_| (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect()));
    }
    for i in 0..d {
        for j in i + 1..d {
            fields.push(space.interpolate(|x| {
                let mut v = vec![0.0; d];
                v[i] = -x[j];
                v[j] = x[i];
                v
            }));
        }
    }
    let g = assemble_h1_gram(space);
    orthonormalize(&g, &mut fields);
    fields
}

/// Gram–Schmidt in the `g` inner product, two passes.
pub(crate) fn orthonormalize(g: &CsrMatrix, vectors: &mut [Vec<f64>]) {
    let mut gv = vec![0.0; g.n()];
    for k in 0..vectors.len() {
        for _ in 0..2 {
            g.matvec_into(&vectors[k], &mut gv).expect("dimension checked by caller");
            for j in 0..k {
                let c = dot(&vectors[j], &gv);
                let (head, tail) = vectors.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= c * y;
                }
            }
        }
        g.matvec_into(&vectors[k], &mut gv).expect("dimension checked by caller");
        let norm = dot(&vectors[k], &gv).sqrt();
        vectors[k].iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_space;
    use crate::mesh::{generate_unit_cube, generate_unit_square};

    #[test]
    fn counts_and_orthonormality() {
        let sq = generate_unit_square(3).unwrap();
        let cube = generate_unit_cube(2).unwrap();
        for (mesh, count) in [(&sq, 3), (&cube, 6)] {
            let space = build_space(mesh, 1).unwrap();
            let basis = rigid_motion_basis(&space);
            assert_eq!(basis.len(), count);
            let g = assemble_h1_gram(&space);
            for (a, u) in basis.iter().enumerate() {
                for (b, v) in basis.iter().enumerate() {
                    let ip = g.bilinear_form(u, v).unwrap();
                    assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }
}
