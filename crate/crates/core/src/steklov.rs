//! Problem-level driver: assembly, solve, zero-mode diagnostics, Korn
//! constant estimate and corner regularity.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::eigen::{group_multiplicities, solve_largest_with, EigenOptions, EigenSolveResult};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_mass, assemble_h1_gram, assemble_stiffness, assemble_strain_gram, build_space,
    rigid_motion_basis, BoundaryWeight, ElasticMaterial,
};
use crate::mesh::Mesh;
use crate::sparse::{dot, CsrMatrix};

/// κ within this distance of 1 belongs to the rigid-motion cluster.
pub const ZERO_MODE_TOL: f64 = 1e-6;

/// Number of independent rigid motions in dimension `dim`.
pub fn rigid_motion_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

#[derive(Debug, Clone)]
pub struct SteklovProblem {
    pub mesh: Mesh,
    pub degree: usize,
    pub material: ElasticMaterial,
    pub weight: BoundaryWeight,
    /// Nonzero eigenvalues wanted.
    pub n_eigs: usize,
    pub solver: EigenOptions,
}

impl SteklovProblem {
    pub fn new(
        mesh: Mesh,
        degree: usize,
        material: ElasticMaterial,
        weight: BoundaryWeight,
        n_eigs: usize,
    ) -> Result<SteklovProblem> {
        let dim = mesh.dim();
        let problem = SteklovProblem { mesh, degree, material, weight, n_eigs, solver: EigenOptions::for_dim(dim) };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.mesh.dim();
        ElasticMaterial::new(self.material.lambda, self.material.mu, dim)?;
        self.weight.check_against(self.mesh.boundary_facets().len(), dim)?;
        if self.degree != 1 && self.degree != 2 {
            return Err(Error::InvalidArgument(format!("supported degrees are 1 and 2, got {}", self.degree)));
        }
        if self.n_eigs == 0 {
            return Err(Error::InvalidArgument("at least one eigenvalue must be requested".into()));
        }
        Ok(())
    }

    /// Stiffness `K` and boundary mass `B`.
    pub fn assemble(&self) -> Result<(CsrMatrix, CsrMatrix)> {
        let space = build_space(&self.mesh, self.degree)?;
        let k = assemble_stiffness(&space, &self.material);
        let b = assemble_boundary_mass(&space, &self.weight)?;
        Ok((k, b))
    }
}

#[derive(Debug, Clone)]
pub struct SteklovSolution {
    pub dim: usize,
    pub n_dofs: usize,
    pub h: f64,
    /// Nonzero modes, ascending.
    pub kappas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Multiplicity groups of the nonzero modes.
    pub groups: Vec<Vec<usize>>,
    pub zero_mode_count: usize,
    /// Largest principal angle (radians, H¹ inner product) between the
    /// zero-mode eigenvectors and the interpolated rigid motions.
    pub zero_mode_angle: f64,
    pub zero_mode_residual: f64,
    /// Full solver output including the zero modes.
    pub spectrum: EigenSolveResult,
    pub warnings: Vec<String>,
}

/// Assembles `A = K + B`, computes the smallest κ and separates the
/// rigid-motion cluster from the nonzero modes.
pub fn solve_steklov(problem: &SteklovProblem) -> Result<SteklovSolution> {
    problem.validate()?;
    let dim = problem.mesh.dim();
    let space = build_space(&problem.mesh, problem.degree)?;
    let k = assemble_stiffness(&space, &problem.material);
    let b = assemble_boundary_mass(&space, &problem.weight)?;
    let a = k.add(&b, 1.0, 1.0)?;
    let n = a.n();
    let nr = rigid_motion_count(dim);

    let mut count = (problem.n_eigs + nr).min(n);
    let spectrum = loop {
        let res = solve_largest_with(&a, &b, count, &problem.solver)?;
        let zero = res.kappas.iter().filter(|k| (*k - 1.0).abs() <= ZERO_MODE_TOL).count();
        let nonzero = res.kappas.len() - zero;
        if nonzero >= problem.n_eigs || count == n {
            break res;
        }
        count = (count + problem.n_eigs - nonzero).min(n);
    };

    let mut zero_idx = Vec::new();
    let mut nonzero_idx = Vec::new();
    for (i, k) in spectrum.kappas.iter().enumerate() {
        if (k - 1.0).abs() <= ZERO_MODE_TOL {
            zero_idx.push(i);
        } else if nonzero_idx.len() < problem.n_eigs {
            nonzero_idx.push(i);
        }
    }
    let mut warnings = Vec::new();
    if zero_idx.len() != nr {
        warnings.push(format!("found {} zero modes, expected {nr}", zero_idx.len()));
    }
    if nonzero_idx.len() < problem.n_eigs {
        warnings.push(format!("only {} nonzero modes available", nonzero_idx.len()));
    }

    let g = assemble_h1_gram(&space);
    let rigid = rigid_motion_basis(&space);
    let zero_vectors: Vec<Vec<f64>> = zero_idx.iter().map(|&i| spectrum.vectors[i].clone()).collect();
    let zero_mode_angle = subspace_angle(&g, &zero_vectors, &rigid);
    let zero_mode_residual = zero_idx.iter().map(|&i| spectrum.residuals[i]).fold(0.0, f64::max);

    let kappas: Vec<f64> = nonzero_idx.iter().map(|&i| spectrum.kappas[i]).collect();
    let groups = group_multiplicities(&kappas, problem.solver.group_tol);
    Ok(SteklovSolution {
        dim,
        n_dofs: n,
        h: problem.mesh.h(),
        omegas: kappas.iter().map(|k| k - 1.0).collect(),
        residuals: nonzero_idx.iter().map(|&i| spectrum.residuals[i]).collect(),
        vectors: nonzero_idx.iter().map(|&i| spectrum.vectors[i].clone()).collect(),
        kappas,
        groups,
        zero_mode_count: zero_idx.len(),
        zero_mode_angle,
        zero_mode_residual,
        spectrum,
        warnings,
    })
}

/// Largest principal angle from `span(target)` to `span(basis)` in the `g`
/// inner product; `π/2` when `basis` is empty and `target` is not.
pub fn subspace_angle(g: &CsrMatrix, basis: &[Vec<f64>], target: &[Vec<f64>]) -> f64 {
    if target.is_empty() {
        return 0.0;
    }
    if basis.is_empty() {
        return std::f64::consts::FRAC_PI_2;
    }
    let mut z = basis.to_vec();
    crate::fem::orthonormalize(g, &mut z);
    let mut r = target.to_vec();
    crate::fem::orthonormalize(g, &mut r);
    let gz: Vec<Vec<f64>> = z.iter().map(|v| g.matvec(v).expect("matching dimensions")).collect();
    let residual: Vec<Vec<f64>> = r
        .iter()
        .map(|t| {
            let mut res = t.clone();
            for (zj, gzj) in z.iter().zip(&gz) {
                let c = dot(gzj, t);
                for (x, y) in res.iter_mut().zip(zj) {
                    *x -= c * y;
                }
            }
            res
        })
        .collect();
    let m = residual.len();
    let gres: Vec<Vec<f64>> = residual.iter().map(|v| g.matvec(v).expect("matching dimensions")).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&residual[i], &gres[j]) + dot(&residual[j], &gres[i])));
    let sin2 = SymmetricEigen::new(gram).eigenvalues.max().clamp(0.0, 1.0);
    sin2.sqrt().asin()
}

/// Largest `|x_i·B·x_j|` over pairs in different multiplicity groups,
/// with every vector scaled to unit `B`-norm first.
pub fn check_b_orthogonality(result: &EigenSolveResult, b: &CsrMatrix) -> Result<f64> {
    let bx: Vec<Vec<f64>> = result.vectors.iter().map(|x| b.matvec(x)).collect::<Result<_>>()?;
    let norms: Vec<f64> = result.vectors.iter().zip(&bx).map(|(x, y)| dot(x, y).max(0.0).sqrt()).collect();
    let mut group_of = vec![0; result.vectors.len()];
    for (g, members) in result.multiplicity_groups.iter().enumerate() {
        for &i in members {
            group_of[i] = g;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..result.vectors.len() {
        for j in i + 1..result.vectors.len() {
            if group_of[i] == group_of[j] || norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            worst = worst.max((dot(&result.vectors[i], &bx[j]) / (norms[i] * norms[j])).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KornEstimate {
    /// Discrete constant in `‖u‖₁ ≤ C_h (‖ε(u)‖² + ‖u‖²_Γ)^{1/2}`.
    pub c_h: f64,
    /// Smallest eigenvalue of `(E + B₁) x = λ G x`.
    pub lambda_min: f64,
}

impl KornEstimate {
    /// Ellipticity constant `min{p0, 2μ, dλ + 2μ} / (2 C_h²)` of the shifted form.
    pub fn alpha(&self, material: &ElasticMaterial, p0: f64, dim: usize) -> f64 {
        let d = dim as f64;
        let m = p0.min(2.0 * material.mu).min(d * (material.lambda + 2.0 / d * material.mu));
        m / (2.0 * self.c_h * self.c_h)
    }
}

/// Korn constant of the space of degree `degree` on `mesh`, with the
/// boundary trace as the stabilizing functional.
pub fn estimate_korn_constant(mesh: &Mesh, degree: usize) -> Result<KornEstimate> {
    let space = build_space(mesh, degree)?;
    let e = assemble_strain_gram(&space);
    let b1 = assemble_boundary_mass(&space, &BoundaryWeight::scalar(1.0)?)?;
    let g = assemble_h1_gram(&space);
    let lhs = e.add(&b1, 1.0, 1.0)?;
    let opts = EigenOptions { block_size: 4, ..EigenOptions::default() };
    let res = solve_largest_with(&lhs, &g, 1, &opts)?;
    let mu_star = res.nus[0];
    Ok(KornEstimate { c_h: mu_star.sqrt(), lambda_min: 1.0 / mu_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityInfo {
    /// Interior angle in radians.
    pub theta: f64,
    /// First root of `r² sin²θ = sin²(rθ)` in (0, 1), or 1.
    pub r1: f64,
    /// `sin θ` vanishes and the equation carries no information.
    pub degenerate: bool,
}

impl RegularityInfo {
    /// `2 min{k, r1}`.
    pub fn predicted_rate(&self, degree: usize) -> f64 {
        2.0 * (degree as f64).min(self.r1)
    }

    pub fn residual(&self) -> f64 {
        regularity_function(self.theta, self.r1).abs()
    }
}

fn regularity_function(theta: f64, r: f64) -> f64 {
    (r * theta.sin()).powi(2) - (r * theta).sin().powi(2)
}

const SCAN_POINTS: usize = 10_000;

/// Sign scan on a uniform grid of (0, 1) followed by bisection.
pub fn regularity_root(theta: f64) -> Result<RegularityInfo> {
    if !(theta > 0.0 && theta < 2.0 * std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("angle must lie in (0, 2π), got {theta}")));
    }
    if theta.sin().abs() < 1e-12 {
        return Ok(RegularityInfo { theta, r1: 1.0, degenerate: true });
    }
    let g = |r: f64| regularity_function(theta, r);
    let step = 1.0 / SCAN_POINTS as f64;
    let mut left = step;
    let mut g_left = g(left);
    for i in 2..SCAN_POINTS {
        let right = i as f64 * step;
        let g_right = g(right);
        if g_right == 0.0 {
            return Ok(RegularityInfo { theta, r1: right, degenerate: false });
        }
        if g_left.signum() != g_right.signum() && g_left != 0.0 {
            let (mut lo, mut hi) = (left, right);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if g(mid).signum() == g(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(RegularityInfo { theta, r1: 0.5 * (lo + hi), degenerate: false });
        }
        left = right;
        g_left = g_right;
    }
    Ok(RegularityInfo { theta, r1: 1.0, degenerate: false })
}

/// Result record written by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub domain: String,
    pub n_dofs: usize,
    pub h: f64,
    pub lambda: f64,
    pub mu: f64,
    pub weight: BoundaryWeight,
    pub kappas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    pub zero_mode_count: usize,
    pub zero_mode_angle: f64,
}

impl SolveRecord {
    pub fn new(domain: &str, problem: &SteklovProblem, solution: &SteklovSolution) -> SolveRecord {
        SolveRecord {
            domain: domain.to_string(),
            n_dofs: solution.n_dofs,
            h: solution.h,
            lambda: problem.material.lambda,
            mu: problem.material.mu,
            weight: problem.weight.clone(),
            kappas: solution.kappas.clone(),
            omegas: solution.omegas.clone(),
            residuals: solution.residuals.clone(),
            groups: solution.groups.clone(),
            zero_mode_count: solution.zero_mode_count,
            zero_mode_angle: solution.zero_mode_angle,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_unit_cube, generate_unit_square};
    use std::f64::consts::PI;

    fn square_problem(n: usize, n_eigs: usize) -> SteklovProblem {
        SteklovProblem::new(
            generate_unit_square(n).unwrap(),
            1,
            ElasticMaterial::new(1.0, 1.0, 2).unwrap(),
            BoundaryWeight::scalar(1.0).unwrap(),
            n_eigs,
        )
        .unwrap()
    }

    #[test]
    fn regularity_examples() {
        let l = regularity_root(1.5 * PI).unwrap();
        assert!((l.r1 - 0.5445).abs() < 5e-5, "{}", l.r1);
        assert!(l.residual() < 1e-12);
        assert!((l.predicted_rate(1) - 2.0 * l.r1).abs() < 1e-15);
        let convex = regularity_root(0.5 * PI).unwrap();
        assert_eq!(convex.r1, 1.0);
        assert_eq!(convex.predicted_rate(1), 2.0);
        let flat = regularity_root(PI).unwrap();
        assert!(flat.degenerate);
        assert_eq!(flat.r1, 1.0);
        assert!(regularity_root(0.0).is_err());
        assert!(regularity_root(7.0).is_err());
    }

    #[test]
    fn square_zero_modes_and_first_eigenvalue() {
        let sol = solve_steklov(&square_problem(10, 7)).unwrap();
        assert_eq!(sol.n_dofs, 242);
        assert_eq!(sol.zero_mode_count, 3);
        assert!(sol.zero_mode_angle < 1e-7);
        assert_eq!(sol.kappas.len(), 7);
        assert!((sol.kappas[0] - 2.800192).abs() < 1e-3, "{:?}", sol.kappas);
        assert!(sol.warnings.is_empty());
    }

    #[test]
    fn korn_estimate_bounds_translation_witness() {
        let est = estimate_korn_constant(&generate_unit_square(4).unwrap(), 1).unwrap();
        assert!(est.c_h.is_finite() && est.c_h > 0.0);
        assert!(est.c_h * est.c_h >= 0.25 - 1e-12);
        assert!((est.c_h * est.c_h * est.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subspace_angle_detects_mismatch() {
        let mesh = generate_unit_cube(1).unwrap();
        let space = build_space(&mesh, 1).unwrap();
        let g = assemble_h1_gram(&space);
        let rigid = rigid_motion_basis(&space);
        assert!(subspace_angle(&g, &rigid, &rigid) < 1e-7);
        assert!(subspace_angle(&g, &rigid[..5], &rigid) > 1.0);
        assert_eq!(subspace_angle(&g, &[], &rigid), PI / 2.0);
    }

    #[test]
    fn invalid_problems_rejected() {
        let mesh = generate_unit_square(2).unwrap();
        let mat = ElasticMaterial { lambda: -5.0, mu: 1.0 };
        assert!(SteklovProblem::new(mesh.clone(), 1, mat, BoundaryWeight::scalar(1.0).unwrap(), 3).is_err());
        let ok = ElasticMaterial::new(1.0, 1.0, 2).unwrap();
        assert!(SteklovProblem::new(mesh.clone(), 3, ok, BoundaryWeight::scalar(1.0).unwrap(), 3).is_err());
        assert!(SteklovProblem::new(mesh, 1, ok, BoundaryWeight::scalar(1.0).unwrap(), 0).is_err());
    }
}
