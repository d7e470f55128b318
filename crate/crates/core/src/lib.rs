pub mod eigen;
pub mod error;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod sparse;
pub mod steklov;

pub use eigen::{EigenOptions, EigenSolveResult};
pub use error::{Error, Result};
pub use fem::{BoundaryWeight, ElasticMaterial};
pub use harness::{run_convergence, ConvergenceReport, Reference, ReportFormat, StudyConfig};
pub use mesh::{Domain, Mesh};
pub use sparse::CsrMatrix;
pub use steklov::{solve_steklov, SteklovProblem, SteklovSolution};
