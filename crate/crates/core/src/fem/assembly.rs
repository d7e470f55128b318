use super::basis::{barycentric_derivatives, barycentric_gradients, values};
use super::material::{BoundaryWeight, ElasticMaterial};
use super::quadrature::QuadratureRule;
use super::space::FunctionSpace;
use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Sparsity of the cell coupling: every pair of DOFs sharing a cell.
struct CellPattern {
    /// Sorted scalar-node neighbours (including self) per node.
    adj_ptr: Vec<usize>,
    adj: Vec<usize>,
    row_ptr: Vec<usize>,
}

impl CellPattern {
    fn new(space: &FunctionSpace) -> CellPattern {
        let nn = space.n_nodes();
        let d = space.components();
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for c in 0..space.mesh().n_cells() {
            let nodes = space.cell_nodes(c);
            for &a in nodes {
                lists[a].extend_from_slice(nodes);
            }
        }
        let mut adj_ptr = Vec::with_capacity(nn + 1);
        let mut adj = Vec::new();
        adj_ptr.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            adj.extend_from_slice(list);
            adj_ptr.push(adj.len());
        }
        let mut row_ptr = Vec::with_capacity(d * nn + 1);
        row_ptr.push(0);
        for _ in 0..d {
            for a in 0..nn {
                let len = adj_ptr[a + 1] - adj_ptr[a];
                row_ptr.push(row_ptr.last().unwrap() + d * len);
            }
        }
        CellPattern { adj_ptr, adj, row_ptr }
    }

    fn neighbours(&self, a: usize) -> &[usize] {
        &self.adj[self.adj_ptr[a]..self.adj_ptr[a + 1]]
    }

    /// Storage position of entry (component i, node a) × (component j, node b).
    fn position(&self, nn: usize, i: usize, a: usize, j: usize, b: usize) -> usize {
        let nb = self.neighbours(a);
        let k = nb.binary_search(&b).expect("node pair shares no cell");
        self.row_ptr[i * nn + a] + j * nb.len() + k
    }

    fn into_matrix(self, nn: usize, d: usize, values: Vec<f64>) -> CsrMatrix {
        let mut col_idx = Vec::with_capacity(values.len());
        for _ in 0..d {
            for a in 0..nn {
                for j in 0..d {
                    col_idx.extend(self.neighbours(a).iter().map(|&b| j * nn + b));
                }
            }
        }
        CsrMatrix::from_parts_unchecked(d * nn, self.row_ptr, col_idx, values)
    }
}

/// Shape function values and physical gradients at one quadrature point.
struct PointData {
    weight: f64,
    values: Vec<f64>,
    grads: Vec<[f64; 3]>,
}

/// Assembles a cell bilinear form. `kernel` adds the contribution of one
/// quadrature point to the upper triangle of the local matrix, indexed by
/// `component * nodes_per_cell + node`; the lower triangle is mirrored.
fn assemble_cells(space: &FunctionSpace, order: usize, kernel: impl Fn(&PointData, usize, &mut [f64])) -> CsrMatrix {
    let mesh = space.mesh();
    let d = space.components();
    let nn = space.n_nodes();
    let nloc = space.nodes_per_cell();
    let m = d * nloc;
    let rule = QuadratureRule::new(d, order);
    let pattern = CellPattern::new(space);
    let mut values_out = vec![0.0; *pattern.row_ptr.last().unwrap()];

    let mut dlam = vec![[0.0; 4]; nloc];
    let mut point = PointData { weight: 0.0, values: vec![0.0; nloc], grads: vec![[0.0; 3]; nloc] };
    let mut local = vec![0.0; m * m];
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        let pts: Vec<&[f64]> = cell.iter().map(|&v| mesh.vertex(v)).collect();
        let (lam_grads, measure) = barycentric_gradients(d, &pts);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            // Reference weights integrate over a simplex of measure 1/d!.
            point.weight = w * measure * super::quadrature::factorial(d);
            values(d, space.degree(), lam, &mut point.values);
            barycentric_derivatives(d, space.degree(), lam, &mut dlam);
            for a in 0..nloc {
                let mut g = [0.0; 3];
                for (b, lg) in lam_grads.iter().enumerate().take(d + 1) {
                    let s = dlam[a][b];
                    if s != 0.0 {
                        for k in 0..d {
                            g[k] += s * lg[k];
                        }
                    }
                }
                point.grads[a] = g;
            }
            kernel(&point, nloc, &mut local);
        }
        for r in 0..m {
            for s in 0..r {
                local[r * m + s] = local[s * m + r];
            }
        }
        let nodes = space.cell_nodes(c);
        for r in 0..m {
            let (i, a) = (r / nloc, nodes[r % nloc]);
            for s in 0..m {
                let (j, b) = (s / nloc, nodes[s % nloc]);
                values_out[pattern.position(nn, i, a, j, b)] += local[r * m + s];
            }
        }
    }
    pattern.into_matrix(nn, d, values_out)
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Elasticity stiffness `2μ(ε(u), ε(v)) + λ(div u, div v)`.
pub fn assemble_stiffness(space: &FunctionSpace, mat: &ElasticMaterial) -> CsrMatrix {
    assemble_stiffness_with_order(space, mat, 2 * space.degree() - 2)
}

/// Stiffness with an explicit quadrature exactness order.
pub fn assemble_stiffness_with_order(space: &FunctionSpace, mat: &ElasticMaterial, order: usize) -> CsrMatrix {
    let d = space.components();
    let (lambda, mu) = (mat.lambda, mat.mu);
    assemble_cells(space, order, |p, nloc, local| {
        let m = d * nloc;
        for i in 0..d {
            for a in 0..nloc {
                let r = i * nloc + a;
                let ga = &p.grads[a];
                for j in i..d {
                    let b0 = if j == i { a } else { 0 };
                    for b in b0..nloc {
                        let gb = &p.grads[b];
                        let mut v = mu * ga[j] * gb[i] + lambda * ga[i] * gb[j];
                        if i == j {
                            v += mu * dot3(ga, gb);
                        }
                        local[r * m + j * nloc + b] += p.weight * v;
                    }
                }
            }
        }
    })
}

/// Gram matrix of the symmetric gradient, `(ε(u), ε(v))` over the domain.
pub fn assemble_strain_gram(space: &FunctionSpace) -> CsrMatrix {
    let d = space.components();
    let order = 2 * space.degree() - 2;
    assemble_cells(space, order, |p, nloc, local| {
        let m = d * nloc;
        // ε of the basis field φ_a e_i, stored as a full d×d tensor.
        let eps = |i: usize, a: usize| {
            let g = &p.grads[a];
            let mut e = [[0.0; 3]; 3];
            for k in 0..d {
                e[i][k] += 0.5 * g[k];
                e[k][i] += 0.5 * g[k];
            }
            e
        };
        for r in 0..m {
            let er = eps(r / nloc, r % nloc);
            for s in r..m {
                let es = eps(s / nloc, s % nloc);
                let mut v = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        v += er[k][l] * es[k][l];
                    }
                }
                local[r * m + s] += p.weight * v;
            }
        }
    })
}

/// Gram matrix of the full H¹ inner product `(u, v) + (∇u, ∇v)`.
pub fn assemble_h1_gram(space: &FunctionSpace) -> CsrMatrix {
    let d = space.components();
    let order = 2 * space.degree();
    assemble_cells(space, order, |p, nloc, local| {
        let m = d * nloc;
        for a in 0..nloc {
            for b in a..nloc {
                let v = p.weight * (p.values[a] * p.values[b] + dot3(&p.grads[a], &p.grads[b]));
                for i in 0..d {
                    local[(i * nloc + a) * m + i * nloc + b] += v;
                }
            }
        }
    })
}

/// Weighted boundary mass `(p u, v)` or `(M u, v)` over the boundary.
pub fn assemble_boundary_mass(space: &FunctionSpace, weight: &BoundaryWeight) -> Result<CsrMatrix> {
    assemble_boundary_mass_with_order(space, weight, 2 * space.degree())
}

/// Boundary mass with an explicit facet quadrature exactness order.
pub fn assemble_boundary_mass_with_order(
    space: &FunctionSpace,
    weight: &BoundaryWeight,
    order: usize,
) -> Result<CsrMatrix> {
    let mesh = space.mesh();
    let d = space.components();
    let facets = mesh.boundary_facets();
    weight.check_against(facets.len(), d)?;
    let s = d - 1;
    let rule = QuadratureRule::new(s, order);
    let nloc = space.nodes_per_facet();
    let ref_measure = 1.0 / super::quadrature::factorial(s);

    // Facet mass on the reference facet, scaled per facet by its measure.
    let mut ref_mass = vec![0.0; nloc * nloc];
    let mut vals = vec![0.0; nloc];
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        values(s, space.degree(), lam, &mut vals);
        for a in 0..nloc {
            for b in a..nloc {
                ref_mass[a * nloc + b] += w / ref_measure * vals[a] * vals[b];
            }
        }
    }
    for a in 0..nloc {
        for b in 0..a {
            ref_mass[a * nloc + b] = ref_mass[b * nloc + a];
        }
    }

    let mut triplets = Vec::new();
    for (f, facet) in facets.iter().enumerate() {
        let nodes = space.facet_nodes(f);
        for a in 0..nloc {
            for b in 0..nloc {
                let mab = facet.measure * ref_mass[a * nloc + b];
                match weight {
                    BoundaryWeight::Scalar { values, .. } => {
                        let p = if values.len() == 1 { values[0] } else { values[f] };
                        for i in 0..d {
                            triplets.push((space.dof(i, nodes[a]), space.dof(i, nodes[b]), p * mab));
                        }
                    }
                    BoundaryWeight::Matrix { values, .. } => {
                        let mf = if values.len() == 1 { &values[0] } else { &values[f] };
                        for i in 0..d {
                            for j in 0..d {
                                if mf[i][j] != 0.0 {
                                    triplets.push((space.dof(i, nodes[a]), space.dof(j, nodes[b]), mf[i][j] * mab));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.n_dofs(), &triplets)
}
