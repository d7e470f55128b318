//! Compressed-row sparse matrices and the direct and iterative solvers built on them.

mod cholesky;
mod ordering;
mod pcg;

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use cholesky::{CholeskyFactor, FactorOptions};
pub use ordering::{nested_dissection, reverse_cuthill_mckee, Graph, Ordering};
pub use pcg::{pcg_solve, PcgOutcome};

/// Square sparse matrix in compressed-row form.
///
/// Column indices are sorted and unique inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays after validating the structure.
    pub fn new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<CsrMatrix> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidArgument("inconsistent CSR arrays".into()));
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidArgument(format!("row pointer decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n) {
                return Err(Error::InvalidArgument(format!("row {i} has unsorted, duplicate or out-of-range columns")));
            }
        }
        let mut m = CsrMatrix { n, row_ptr, col_idx, values, symmetric: false };
        m.symmetric = m.is_symmetric(0.0);
        Ok(m)
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicates are summed in insertion order; exact zeros are dropped.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<CsrMatrix> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(Error::InvalidArgument(format!("triplet ({i}, {j}) out of range for n = {n}")));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // Stable sort keeps insertion order among duplicates.
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for &t in &order {
            let (i, j, v) = triplets[t];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
                last = Some((i, j));
            }
        }
        let mut kept_cols = Vec::with_capacity(col_idx.len());
        let mut kept_vals = Vec::with_capacity(values.len());
        for ((&i, &j), &v) in rows.iter().zip(&col_idx).zip(&values) {
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                kept_cols.push(j);
                kept_vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix::new(n, row_ptr, kept_cols, kept_vals)
    }

    pub(crate) fn from_parts_unchecked(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> CsrMatrix {
        CsrMatrix { n, row_ptr, col_idx, values, symmetric: false }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> CsrMatrix {
        let n = d.len();
        CsrMatrix::from_triplets(n, &d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect::<Vec<_>>())
            .expect("diagonal indices are in range")
    }

    /// Dense row-major matrix to CSR, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<CsrMatrix> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            triplets.extend(row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (i, j, v)));
        }
        CsrMatrix::from_triplets(n, &triplets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the matrix was found exactly symmetric when it was finalized.
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: y.len() });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Y = A X for a row-major block of `width` vectors.
    pub fn matmul_block(&self, x: &[f64], width: usize, y: &mut [f64]) {
        assert_eq!(x.len(), self.n * width);
        assert_eq!(y.len(), self.n * width);
        for i in 0..self.n {
            let yi = &mut y[i * width..(i + 1) * width];
            yi.iter_mut().for_each(|v| *v = 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[p];
                let xj = &x[self.col_idx[p] * width..(self.col_idx[p] + 1) * width];
                for (yv, xv) in yi.iter_mut().zip(xj) {
                    *yv += a * xv;
                }
            }
        }
    }

    /// x·A·x
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        self.bilinear_form(x, x)
    }

    /// x·A·y
    pub fn bilinear_form(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let ay = self.matvec(y)?;
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(x.iter().zip(&ay).map(|(a, b)| a * b).sum())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Exact (tol = 0) or approximate symmetry check.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| {
                let t = self.get(j, i);
                if tol == 0.0 {
                    t == v
                } else {
                    (t - v).abs() <= tol * v.abs().max(t.abs()).max(1.0)
                }
            })
        })
    }

    /// Returns `alpha * self + beta * other` on the union pattern.
    pub fn add(&self, other: &CsrMatrix, alpha: f64, beta: f64) -> Result<CsrMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (j, v) = if q == cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    p += 1;
                    (ca[p - 1], alpha * va[p - 1])
                } else if p == ca.len() || cb[q] < ca[p] {
                    q += 1;
                    (cb[q - 1], beta * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ca[p - 1], alpha * va[p - 1] + beta * vb[q - 1])
                };
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut m = CsrMatrix::from_parts_unchecked(self.n, row_ptr, col_idx, values);
        m.finalize();
        Ok(m)
    }

    pub fn scaled(&self, factor: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m.finalize();
        m
    }

    /// Drops explicit zeros and refreshes the symmetry flag.
    pub fn finalize(&mut self) {
        if self.values.iter().any(|&v| v == 0.0) {
            let mut w = 0;
            let mut start = 0;
            for i in 0..self.n {
                let end = self.row_ptr[i + 1];
                for p in start..end {
                    if self.values[p] != 0.0 {
                        self.col_idx[w] = self.col_idx[p];
                        self.values[w] = self.values[p];
                        w += 1;
                    }
                }
                start = end;
                self.row_ptr[i + 1] = w;
            }
            self.col_idx.truncate(w);
            self.values.truncate(w);
        }
        self.symmetric = self.is_symmetric(0.0);
    }

    /// Symmetric permutation `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        let n = self.n;
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            let (cols, vals) = self.row(old);
            entries.clear();
            entries.extend(cols.iter().zip(vals).map(|(&c, &v)| (inverse[c], v)));
            entries.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &entries {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values, symmetric: self.symmetric }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }

    /// Adjacency structure of the pattern, diagonal excluded.
    pub fn graph(&self) -> Graph {
        let mut xadj = Vec::with_capacity(self.n + 1);
        xadj.push(0);
        let mut adjncy = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            adjncy.extend(self.row(i).0.iter().copied().filter(|&j| j != i));
            xadj.push(adjncy.len());
        }
        Graph::new(xadj, adjncy)
    }

    /// Text export: `csr <n> <nnz>`, then the row pointers, column indices
    /// and values, one array per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "csr {} {}", self.n, self.nnz()).unwrap();
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        writeln!(out, "{}", join(&mut self.row_ptr.iter().map(|v| v.to_string()))).unwrap();
        writeln!(out, "{}", join(&mut self.col_idx.iter().map(|v| v.to_string()))).unwrap();
        writeln!(out, "{}", join(&mut self.values.iter().map(|v| format!("{v:?}")))).unwrap();
        out
    }

    pub fn from_text(text: &str) -> Result<CsrMatrix> {
        let mut lines = text.lines();
        let bad = |line: usize, msg: &str| Error::Parse { line, message: msg.to_string() };
        let header: Vec<&str> = lines.next().ok_or_else(|| bad(1, "empty input"))?.split_whitespace().collect();
        if header.len() != 3 || header[0] != "csr" {
            return Err(bad(1, "expected header 'csr <n> <nnz>'"));
        }
        let n: usize = header[1].parse().map_err(|_| bad(1, "bad n"))?;
        let nnz: usize = header[2].parse().map_err(|_| bad(1, "bad nnz"))?;
        let mut array = |line: usize, len: usize| -> Result<Vec<String>> {
            let items: Vec<String> = lines.next().unwrap_or("").split_whitespace().map(str::to_string).collect();
            if items.len() != len {
                return Err(bad(line, &format!("expected {len} entries, found {}", items.len())));
            }
            Ok(items)
        };
        let parse_usize = |line: usize, items: Vec<String>| -> Result<Vec<usize>> {
            items.iter().map(|s| s.parse().map_err(|_| bad(line, "bad integer"))).collect()
        };
        let row_ptr = parse_usize(2, array(2, n + 1)?)?;
        let col_idx = parse_usize(3, array(3, nnz)?)?;
        let values: Vec<f64> =
            array(4, nnz)?.iter().map(|s| s.parse().map_err(|_| bad(4, "bad value"))).collect::<Result<_>>()?;
        CsrMatrix::new(n, row_ptr, col_idx, values)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> CsrMatrix {
        CsrMatrix::from_dense(&[vec![4.0, -1.0, 0.0], vec![-1.0, 4.0, 2.0], vec![0.0, 2.0, 5.0]]).unwrap()
    }

    #[test]
    fn matvec_matches_dense_product() {
        let a = fixture();
        let x = [1.0, -2.0, 0.5];
        let dense = a.to_dense();
        let expected: Vec<f64> = dense.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        assert_eq!(a.matvec(&x).unwrap(), expected);
        assert_eq!(CsrMatrix::identity(3).matvec(&x).unwrap(), x.to_vec());
        assert!(matches!(a.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 0, 1.0), (1, 0, -1.0)]).unwrap();
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.nnz(), 2);
        assert!(!m.symmetric());
    }

    #[test]
    fn text_round_trip() {
        let a = fixture();
        assert_eq!(CsrMatrix::from_text(&a.to_text()).unwrap(), a);
        assert!(CsrMatrix::from_text("csr 2 1\n0 1\n0\n").is_err());
    }

    #[test]
    fn add_and_permute() {
        let a = fixture();
        let s = a.add(&CsrMatrix::identity(3), 1.0, 1.0).unwrap();
        assert_eq!(s.get(1, 1), 5.0);
        let z = a.add(&a, 1.0, -1.0).unwrap();
        assert_eq!(z.nnz(), 0);
        let p = a.permute_symmetric(&[2, 0, 1]);
        assert_eq!(p.get(0, 0), 5.0);
        assert_eq!(p.get(0, 2), 2.0);
        assert!(p.symmetric());
    }

    proptest! {
        #[test]
        fn symmetric_matvec_is_self_adjoint(
            entries in proptest::collection::vec((0usize..12, 0usize..12, -5.0f64..5.0), 1..60),
            x in proptest::collection::vec(-1.0f64..1.0, 12),
            y in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let mut triplets = Vec::new();
            for &(i, j, v) in &entries {
                triplets.push((i, j, v));
                if i != j {
                    triplets.push((j, i, v));
                }
            }
            let a = CsrMatrix::from_triplets(12, &triplets).unwrap();
            prop_assert!(a.symmetric());
            let lhs = dot(&x, &a.matvec(&y).unwrap());
            let rhs = dot(&y, &a.matvec(&x).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
        }
    }
}
