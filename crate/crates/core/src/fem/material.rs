use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic Lamé parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticMaterial {
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticMaterial {
    /// Requires `mu > 0` and `lambda + (2/d) mu > 0`.
    pub fn new(lambda: f64, mu: f64, dim: usize) -> Result<ElasticMaterial> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!("shear modulus mu must be positive, got {mu}")));
        }
        if !(lambda + 2.0 / dim as f64 * mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Lame parameters violate lambda + (2/d) mu > 0: lambda = {lambda}, mu = {mu}, d = {dim}"
            )));
        }
        Ok(ElasticMaterial { lambda, mu })
    }
}

/// Piecewise-constant boundary weight: one scalar `p` or one symmetric
/// positive definite `d×d` matrix `M` per boundary facet.
///
/// A single value applies to every facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryWeight {
    Scalar { values: Vec<f64>, lower_bound: f64 },
    Matrix { values: Vec<Vec<Vec<f64>>>, lower_bound: f64 },
}

fn smallest_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let dense = DMatrix::from_fn(d, d, |i, j| m[i][j]);
    dense.symmetric_eigenvalues().min()
}

impl BoundaryWeight {
    /// Uniform scalar weight `p > 0`.
    pub fn scalar(p: f64) -> Result<BoundaryWeight> {
        BoundaryWeight::scalar_per_facet(vec![p], p)
    }

    /// One value per facet, each at least `lower_bound > 0`.
    pub fn scalar_per_facet(values: Vec<f64>, lower_bound: f64) -> Result<BoundaryWeight> {
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidArgument(format!("weight lower bound must be positive, got {lower_bound}")));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty weight".into()));
        }
        if let Some(bad) = values.iter().find(|&&p| !(p >= lower_bound) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight {bad} below its lower bound {lower_bound}")));
        }
        Ok(BoundaryWeight::Scalar { values, lower_bound })
    }

    /// Uniform matrix weight; the lower bound is its smallest eigenvalue.
    pub fn matrix(m: Vec<Vec<f64>>) -> Result<BoundaryWeight> {
        let d = m.len();
        if d == 0 || m.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("matrix weight must be square".into()));
        }
        let lower = smallest_eigenvalue(&m);
        BoundaryWeight::matrix_per_facet(vec![m], lower)
    }

    /// One symmetric matrix per facet with smallest eigenvalue at least `lower_bound > 0`.
    pub fn matrix_per_facet(values: Vec<Vec<Vec<f64>>>, lower_bound: f64) -> Result<BoundaryWeight> {
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "matrix weight must be positive definite (lower bound {lower_bound})"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty weight".into()));
        }
        let d = values[0].len();
        for m in &values {
            if m.len() != d || m.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidArgument("matrix weights must all be square of equal size".into()));
            }
            for i in 0..d {
                for j in 0..d {
                    if (m[i][j] - m[j][i]).abs() > 1e-14 {
                        return Err(Error::InvalidArgument(format!("matrix weight is not symmetric: {m:?}")));
                    }
                }
            }
            // Small slack for the eigenvalue computation itself.
            if smallest_eigenvalue(m) < lower_bound * (1.0 - 1e-12) {
                return Err(Error::InvalidArgument(format!("matrix weight {m:?} has eigenvalue below {lower_bound}")));
            }
        }
        Ok(BoundaryWeight::Matrix { values, lower_bound })
    }

    pub fn lower_bound(&self) -> f64 {
        match self {
            BoundaryWeight::Scalar { lower_bound, .. } | BoundaryWeight::Matrix { lower_bound, .. } => *lower_bound,
        }
    }

    /// Number of facets the weight is defined for, `None` when uniform.
    pub fn facet_count(&self) -> Option<usize> {
        let n = match self {
            BoundaryWeight::Scalar { values, .. } => values.len(),
            BoundaryWeight::Matrix { values, .. } => values.len(),
        };
        (n > 1).then_some(n)
    }

    /// Weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<BoundaryWeight> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {c}")));
        }
        Ok(match self {
            BoundaryWeight::Scalar { values, lower_bound } => {
                BoundaryWeight::Scalar { values: values.iter().map(|p| c * p).collect(), lower_bound: c * lower_bound }
            }
            BoundaryWeight::Matrix { values, lower_bound } => BoundaryWeight::Matrix {
                values: values.iter().map(|m| m.iter().map(|r| r.iter().map(|v| c * v).collect()).collect()).collect(),
                lower_bound: c * lower_bound,
            },
        })
    }

    pub(crate) fn check_against(&self, n_facets: usize, dim: usize) -> Result<()> {
        if let Some(n) = self.facet_count() {
            if n != n_facets {
                return Err(Error::DimensionMismatch { expected: n_facets, got: n });
            }
        }
        if let BoundaryWeight::Matrix { values, .. } = self {
            if values[0].len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: values[0].len() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_admissibility() {
        assert!(ElasticMaterial::new(1.0, 1.0, 2).is_ok());
        assert!(ElasticMaterial::new(-0.9, 1.0, 2).is_ok());
        assert!(ElasticMaterial::new(-1.0, 1.0, 2).is_err());
        assert!(ElasticMaterial::new(-0.6, 1.0, 3).is_ok());
        assert!(ElasticMaterial::new(-0.7, 1.0, 3).is_err());
        assert!(ElasticMaterial::new(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(BoundaryWeight::scalar(0.0).is_err());
        assert!(BoundaryWeight::scalar_per_facet(vec![1.0, 0.5], 0.6).is_err());
        assert!(BoundaryWeight::scalar_per_facet(vec![1.0, 0.7], 0.6).is_ok());
        let w = BoundaryWeight::matrix(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!((w.lower_bound() - 1.0).abs() < 1e-14);
        assert!(BoundaryWeight::matrix(vec![vec![1.0, 0.1], vec![0.0, 2.0]]).is_err());
        assert!(BoundaryWeight::matrix(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }
}
