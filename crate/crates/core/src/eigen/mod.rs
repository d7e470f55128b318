//! Largest eigenvalues ν of `A⁻¹B` for a symmetric positive definite `A`
//! and symmetric positive semidefinite `B`, reported as κ = 1/ν.

mod lanczos;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, Ordering};

pub use lanczos::{solve_largest, solve_largest_with};

/// Default relative gap below which neighbouring κ are grouped.
pub const DEFAULT_GROUP_TOL: f64 = 1e-6;

/// Seed of the start block.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Convergence threshold on every Ritz residual.
    pub tol: f64,
    /// Maximum number of block operator applications.
    pub max_iter: usize,
    pub block_size: usize,
    /// Largest basis before a thick restart; `None` picks one from `count`.
    pub max_basis: Option<usize>,
    pub seed: u64,
    pub group_tol: f64,
    pub ordering: Ordering,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_iter: 2000,
            block_size: 5,
            max_basis: None,
            seed: DEFAULT_SEED,
            group_tol: DEFAULT_GROUP_TOL,
            ordering: Ordering::default(),
        }
    }
}

impl EigenOptions {
    /// Block size one above the rigid-motion multiplicity in dimension `dim`, at least 5.
    pub fn for_dim(dim: usize) -> EigenOptions {
        EigenOptions { block_size: (dim * (dim + 1) / 2 + 1).max(5), ..EigenOptions::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSolveResult {
    /// Ascending κ = 1/ν.
    pub kappas: Vec<f64>,
    /// w = κ − 1.
    pub omegas: Vec<f64>,
    /// ν in the same order as `kappas`.
    pub nus: Vec<f64>,
    /// A-orthonormal eigenvectors.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// ‖B x − ν A x‖ in the A⁻¹ norm.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub multiplicity_groups: Vec<Vec<usize>>,
}

/// Partition of an ascending list into maximal runs whose consecutive
/// gaps satisfy `κ[i+1] − κ[i] ≤ tol · max(1, κ[i])`.
pub fn group_multiplicities(kappas: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &k) in kappas.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (k - kappas[i - 1]).abs() <= tol * kappas[i - 1].abs().max(1.0) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// κ = x·(K + B)·x / x·B·x.
pub fn rayleigh_quotient(k: &CsrMatrix, b: &CsrMatrix, x: &[f64]) -> Result<f64> {
    let xbx = b.quadratic_form(x)?;
    let xkx = k.quadratic_form(x)?;
    let scale = x.iter().map(|v| v * v).sum::<f64>();
    if !(xbx > 1e-14 * scale.max(f64::MIN_POSITIVE) * b.norm_inf()) {
        return Err(Error::TraceVanishes(xbx));
    }
    Ok((xkx + xbx) / xbx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        assert_eq!(group_multiplicities(&[1.0, 1.0, 1.0, 2.53], 1e-6), vec![vec![0, 1, 2], vec![3]]);
        assert!(group_multiplicities(&[], 1e-6).is_empty());
        assert_eq!(group_multiplicities(&[3.0, 3.002, 3.004, 4.0], 1e-3), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(group_multiplicities(&[3.0, 3.01], 1e-3), vec![vec![0], vec![1]]);
    }

    #[test]
    fn rayleigh_quotient_rejects_zero_trace() {
        let k = CsrMatrix::identity(3);
        let b = CsrMatrix::diagonal(&[1.0, 0.0, 0.0]);
        assert!(matches!(rayleigh_quotient(&k, &b, &[0.0, 1.0, 1.0]), Err(Error::TraceVanishes(_))));
        assert!((rayleigh_quotient(&k, &b, &[1.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }
}
