use std::collections::HashMap;

use super::basis::{local_edges, nodes_per_simplex};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Vector-valued Lagrange space of degree 1 or 2 with `d` components.
///
/// Scalar nodes are the mesh vertices followed (for degree 2) by one node
/// per edge in first-visit order. Global DOFs are component-major:
/// `dof = component * n_nodes + node`.
#[derive(Debug, Clone)]
pub struct FunctionSpace<'m> {
    mesh: &'m Mesh,
    degree: usize,
    n_nodes: usize,
    nodes_per_cell: usize,
    cell_nodes: Vec<usize>,
    node_coords: Vec<f64>,
    nodes_per_facet: usize,
    facet_nodes: Vec<usize>,
    boundary_dofs: Vec<usize>,
}

/// Builds the space of continuous piecewise polynomials of degree `degree`.
pub fn build_space(mesh: &Mesh, degree: usize) -> Result<FunctionSpace<'_>> {
    if degree != 1 && degree != 2 {
        return Err(Error::InvalidArgument(format!("supported degrees are 1 and 2, got {degree}")));
    }
    let dim = mesh.dim();
    let nv = mesh.n_vertices();
    let nodes_per_cell = nodes_per_simplex(dim, degree);
    let mut cell_nodes = Vec::with_capacity(mesh.n_cells() * nodes_per_cell);
    let mut node_coords = mesh.coords().to_vec();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut n_nodes = nv;
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        cell_nodes.extend_from_slice(cell);
        if degree == 2 {
            for &(i, j) in local_edges(dim) {
                let (a, b) = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                let node = *edges.entry((a, b)).or_insert_with(|| {
                    let id = n_nodes;
                    n_nodes += 1;
                    for k in 0..dim {
                        node_coords.push(0.5 * (mesh.vertex(a)[k] + mesh.vertex(b)[k]));
                    }
                    id
                });
                cell_nodes.push(node);
            }
        }
    }

    let nodes_per_facet = nodes_per_simplex(dim - 1, degree);
    let mut facet_nodes = Vec::with_capacity(mesh.boundary_facets().len() * nodes_per_facet);
    let mut on_boundary = vec![false; n_nodes];
    for f in mesh.boundary_facets() {
        let v = f.vertices();
        facet_nodes.extend_from_slice(v);
        if degree == 2 {
            for &(i, j) in local_edges(dim - 1) {
                let key = (v[i].min(v[j]), v[i].max(v[j]));
                facet_nodes.push(edges[&key]);
            }
        }
    }
    for &node in &facet_nodes {
        on_boundary[node] = true;
    }
    let mut boundary_dofs = Vec::new();
    for comp in 0..dim {
        boundary_dofs.extend((0..n_nodes).filter(|&n| on_boundary[n]).map(|n| comp * n_nodes + n));
    }
    Ok(FunctionSpace {
        mesh,
        degree,
        n_nodes,
        nodes_per_cell,
        cell_nodes,
        node_coords,
        nodes_per_facet,
        facet_nodes,
        boundary_dofs,
    })
}

impl<'m> FunctionSpace<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of vector components, equal to the spatial dimension.
    pub fn components(&self) -> usize {
        self.mesh.dim()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.components()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.nodes_per_cell
    }

    /// Scalar nodes of cell `c`: its vertices, then its edges for degree 2.
    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c * self.nodes_per_cell..(c + 1) * self.nodes_per_cell]
    }

    /// Global DOFs of cell `c`, component-major.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let nodes = self.cell_nodes(c);
        (0..self.components()).flat_map(|comp| nodes.iter().map(move |&n| comp * self.n_nodes + n)).collect()
    }

    pub fn nodes_per_facet(&self) -> usize {
        self.nodes_per_facet
    }

    /// Scalar nodes of the `f`-th boundary facet.
    pub fn facet_nodes(&self, f: usize) -> &[usize] {
        &self.facet_nodes[f * self.nodes_per_facet..(f + 1) * self.nodes_per_facet]
    }

    pub fn node_coords(&self, node: usize) -> &[f64] {
        let d = self.components();
        &self.node_coords[node * d..(node + 1) * d]
    }

    pub fn dof(&self, component: usize, node: usize) -> usize {
        component * self.n_nodes + node
    }

    /// Sorted global DOFs whose node lies on the boundary.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// Coefficient vector interpolating a vector field at the nodes.
    pub fn interpolate(&self, field: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let d = self.components();
        let mut out = vec![0.0; self.n_dofs()];
        for node in 0..self.n_nodes {
            let value = field(self.node_coords(node));
            for comp in 0..d {
                out[comp * self.n_nodes + node] = value[comp];
            }
        }
        out
    }
}
