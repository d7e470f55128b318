//! Vector-valued Lagrange finite elements and the matrices of the
//! Steklov–Lamé problem.

mod assembly;
mod basis;
mod material;
pub mod quadrature;
mod rigid;
mod space;

pub use assembly::{
    assemble_boundary_mass, assemble_boundary_mass_with_order, assemble_h1_gram, assemble_stiffness, assemble_stiffness_with_order, assemble_strain_gram,
};
pub use material::{BoundaryWeight, ElasticMaterial};
pub use quadrature::QuadratureRule;
pub(crate) use rigid::orthonormalize;
pub use rigid::rigid_motion_basis;
pub use space::{build_space, FunctionSpace};
