//! Fixtures shared by the criterion benches.

use steklov_core::fem::{assemble_boundary_mass, assemble_stiffness, build_space, BoundaryWeight, ElasticMaterial};
use steklov_core::mesh::Domain;
use steklov_core::sparse::CsrMatrix;
use steklov_core::SteklovProblem;

/// Unit-parameter problem on a generated mesh.
pub fn problem(domain: Domain, level: usize, degree: usize, n_eigs: usize) -> SteklovProblem {
    let mesh = domain.generate(level).expect("valid level");
    let material = ElasticMaterial::new(1.0, 1.0, mesh.dim()).expect("valid material");
    SteklovProblem::new(mesh, degree, material, BoundaryWeight::scalar(1.0).unwrap(), n_eigs).expect("valid problem")
}

/// `A = K + B` and `B` for the given mesh.
pub fn pencil(domain: Domain, level: usize) -> (CsrMatrix, CsrMatrix) {
    let mesh = domain.generate(level).expect("valid level");
    let space = build_space(&mesh, 1).expect("P1 space");
    let k = assemble_stiffness(&space, &ElasticMaterial::new(1.0, 1.0, mesh.dim()).unwrap());
    let b = assemble_boundary_mass(&space, &BoundaryWeight::scalar(1.0).unwrap()).unwrap();
    (k.add(&b, 1.0, 1.0).unwrap(), b)
}
