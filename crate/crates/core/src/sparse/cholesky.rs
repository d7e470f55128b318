//! Up-looking sparse LDLᵀ factorization with a fill-reducing permutation.
//!
//! `P A Pᵀ = L D Lᵀ` with `L` unit lower triangular stored by columns
//! (diagonal omitted) and `D` diagonal. The symbolic phase computes the
//! elimination tree and column counts; the numeric phase builds one row of
//! `L` at a time from the etree reach of the corresponding row of `A`.

use super::{CsrMatrix, Ordering};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FactorOptions {
    pub ordering: Ordering,
    /// A pivot `d_k <= pivot_tol * |a_kk|` is reported as loss of definiteness.
    pub pivot_tol: f64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { ordering: Ordering::default(), pivot_tol: 1e-9 }
    }
}

/// Sparse LDLᵀ factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    diag: Vec<f64>,
}

impl CholeskyFactor {
    pub fn factorize(a: &CsrMatrix) -> Result<CholeskyFactor> {
        CholeskyFactor::factorize_with(a, FactorOptions::default())
    }

    pub fn factorize_with(a: &CsrMatrix, options: FactorOptions) -> Result<CholeskyFactor> {
        if !a.symmetric() {
            return Err(Error::InvalidArgument("Cholesky factorization needs an exactly symmetric matrix".into()));
        }
        if a.n() > u32::MAX as usize {
            return Err(Error::InvalidArgument("matrix too large for 32-bit factor indices".into()));
        }
        let n = a.n();
        let perm = options.ordering.compute(&a.graph());
        let pa = a.permute_symmetric(&perm);

        // Elimination tree (Liu), using the lower part of each row of PAPᵀ,
        // which is column k of the upper triangle.
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for &i in pa.row(k).0 {
                if i >= k {
                    break;
                }
                let mut i = i;
                while i != usize::MAX && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == usize::MAX {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        // Column counts: row k of L touches every node on the etree paths from
        // the row's nonzeros up to k.
        let mut counts = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            flag[k] = k;
            for &i in pa.row(k).0 {
                if i >= k {
                    break;
                }
                let mut i = i;
                while flag[i] != k {
                    counts[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0u32; nnz];
        let mut values = vec![0.0f64; nnz];
        let mut fill = col_ptr[..n].to_vec();
        let mut diag = vec![0.0; n];

        let mut y = vec![0.0f64; n];
        let mut stack = vec![0usize; n];
        let mut path = Vec::with_capacity(64);
        flag.iter_mut().for_each(|f| *f = usize::MAX);
        for k in 0..n {
            // Reach of row k in the etree, in topological order at stack[top..].
            let mut top = n;
            flag[k] = k;
            let mut akk = 0.0;
            let (cols, vals) = pa.row(k);
            for (&i, &v) in cols.iter().zip(vals) {
                if i > k {
                    break;
                }
                if i == k {
                    akk = v;
                    continue;
                }
                y[i] += v;
                let mut i = i;
                path.clear();
                while flag[i] != k {
                    path.push(i);
                    flag[i] = k;
                    i = parent[i];
                }
                while let Some(node) = path.pop() {
                    top -= 1;
                    stack[top] = node;
                }
            }
            let mut dk = akk;
            for &j in &stack[top..n] {
                let yj = y[j];
                y[j] = 0.0;
                for p in col_ptr[j]..fill[j] {
                    y[row_idx[p] as usize] -= values[p] * yj;
                }
                let lkj = yj / diag[j];
                dk -= lkj * yj;
                row_idx[fill[j]] = k as u32;
                values[fill[j]] = lkj;
                fill[j] += 1;
            }
            if !(dk > options.pivot_tol * akk.abs()) {
                return Err(Error::NotPositiveDefinite { column: perm[k], pivot: dk });
            }
            diag[k] = dk;
        }
        Ok(CholeskyFactor { n, perm, col_ptr, row_idx, values, diag })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fill-reducing permutation, `perm[new] = old`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// In place `X <- L⁻¹ X` for a row-major block of `width` vectors in permuted order.
    pub fn solve_lower_block(&self, x: &mut [f64], width: usize) {
        debug_assert_eq!(x.len(), self.n * width);
        let mut xj = vec![0.0; width];
        for j in 0..self.n {
            xj.copy_from_slice(&x[j * width..(j + 1) * width]);
            if xj.iter().all(|&v| v == 0.0) {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let r = self.row_idx[p] as usize;
                let l = self.values[p];
                for (xr, &v) in x[r * width..(r + 1) * width].iter_mut().zip(&xj) {
                    *xr -= l * v;
                }
            }
        }
    }

    /// In place `X <- L⁻ᵀ X` for a row-major block in permuted order.
    pub fn solve_upper_block(&self, x: &mut [f64], width: usize) {
        debug_assert_eq!(x.len(), self.n * width);
        let mut acc = vec![0.0; width];
        for j in (0..self.n).rev() {
            acc.copy_from_slice(&x[j * width..(j + 1) * width]);
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let r = self.row_idx[p] as usize;
                let l = self.values[p];
                for (a, &v) in acc.iter_mut().zip(&x[r * width..(r + 1) * width]) {
                    *a -= l * v;
                }
            }
            x[j * width..(j + 1) * width].copy_from_slice(&acc);
        }
    }

    /// Solves `A X = B` for a row-major block of right-hand sides.
    pub fn solve_block(&self, b: &[f64], width: usize) -> Result<Vec<f64>> {
        if b.len() != self.n * width {
            return Err(Error::DimensionMismatch { expected: self.n * width, got: b.len() });
        }
        let mut x = vec![0.0; b.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            x[new * width..(new + 1) * width].copy_from_slice(&b[old * width..(old + 1) * width]);
        }
        self.solve_lower_block(&mut x, width);
        for (j, d) in self.diag.iter().enumerate() {
            x[j * width..(j + 1) * width].iter_mut().for_each(|v| *v /= d);
        }
        self.solve_upper_block(&mut x, width);
        let mut out = vec![0.0; b.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old * width..(old + 1) * width].copy_from_slice(&x[new * width..(new + 1) * width]);
        }
        Ok(out)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_block(b, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Ordering;

    fn laplacian_2d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        let id = |i: usize, j: usize| j * n + i;
        for j in 0..n {
            for i in 0..n {
                t.push((id(i, j), id(i, j), 4.0));
                if i > 0 {
                    t.push((id(i, j), id(i - 1, j), -1.0));
                    t.push((id(i - 1, j), id(i, j), -1.0));
                }
                if j > 0 {
                    t.push((id(i, j), id(i, j - 1), -1.0));
                    t.push((id(i, j - 1), id(i, j), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n * n, &t).unwrap()
    }

    #[test]
    fn two_by_two_hand_inverse() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let f = CholeskyFactor::factorize(&a).unwrap();
        let x = f.solve(&[1.0, 0.0]).unwrap();
        assert!((x[0] - 3.0 / 11.0).abs() < 1e-15);
        assert!((x[1] + 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn every_ordering_solves_the_same_system() {
        let a = laplacian_2d(23);
        let x_true: Vec<f64> = (0..a.n()).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let b = a.matvec(&x_true).unwrap();
        for ordering in [Ordering::Natural, Ordering::ReverseCuthillMcKee, Ordering::NestedDissection] {
            let f = CholeskyFactor::factorize_with(&a, FactorOptions { ordering, ..Default::default() }).unwrap();
            let x = f.solve(&b).unwrap();
            let ax = a.matvec(&x).unwrap();
            let scale = a.norm_inf() * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = ax.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            assert!(res <= 1e-9 * scale, "{ordering:?}: residual {res}");
        }
    }

    #[test]
    fn nested_dissection_reduces_fill() {
        let a = laplacian_2d(60);
        let nnz = |ordering| CholeskyFactor::factorize_with(&a, FactorOptions { ordering, ..Default::default() }).unwrap().nnz();
        assert!(nnz(Ordering::NestedDissection) < nnz(Ordering::ReverseCuthillMcKee));
    }

    #[test]
    fn indefinite_and_singular_rejected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(CholeskyFactor::factorize(&a), Err(Error::NotPositiveDefinite { .. })));
        let s = CsrMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(matches!(CholeskyFactor::factorize(&s), Err(Error::NotPositiveDefinite { .. })));
        let nonsym = CsrMatrix::from_dense(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(CholeskyFactor::factorize(&nonsym).is_err());
    }

    #[test]
    fn block_solve_matches_columnwise() {
        let a = laplacian_2d(9);
        let f = CholeskyFactor::factorize(&a).unwrap();
        let n = a.n();
        let b: Vec<f64> = (0..n * 3).map(|i| (i as f64).sin()).collect();
        let block = f.solve_block(&b, 3).unwrap();
        for c in 0..3 {
            let col: Vec<f64> = (0..n).map(|i| b[i * 3 + c]).collect();
            let x = f.solve(&col).unwrap();
            for i in 0..n {
                assert_eq!(x[i], block[i * 3 + c]);
            }
        }
    }
}
