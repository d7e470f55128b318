//! Thick-restart block Lanczos on `C = D^{-1/2} L⁻¹ (P B Pᵀ) L⁻ᵀ D^{-1/2}`
//! where `P A Pᵀ = L D Lᵀ`. `C` is symmetric and similar to `A⁻¹B`;
//! a unit vector `y` maps to the A-normalized `x = Pᵀ L⁻ᵀ D^{-1/2} y`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{group_multiplicities, EigenOptions, EigenSolveResult};
use crate::error::{Error, Result};
use crate::sparse::{dot, CholeskyFactor, CsrMatrix, FactorOptions};

/// Relative norm below which a new Krylov direction counts as dependent.
const DEFLATION_TOL: f64 = 1e-13;

struct Operator {
    factor: CholeskyFactor,
    pb: CsrMatrix,
    scale: Vec<f64>,
}

impl Operator {
    fn n(&self) -> usize {
        self.scale.len()
    }

    fn apply(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.n();
        let w = cols.len();
        let mut x = vec![0.0; n * w];
        for (c, col) in cols.iter().enumerate() {
            for i in 0..n {
                x[i * w + c] = col[i] * self.scale[i];
            }
        }
        self.factor.solve_upper_block(&mut x, w);
        let mut y = vec![0.0; n * w];
        self.pb.matmul_block(&x, w, &mut y);
        self.factor.solve_lower_block(&mut y, w);
        (0..w).map(|c| (0..n).map(|i| y[i * w + c] * self.scale[i]).collect()).collect()
    }

    /// A-normalized vector in the original numbering.
    fn recover(&self, y: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = y.iter().zip(&self.scale).map(|(a, s)| a * s).collect();
        self.factor.solve_upper_block(&mut z, 1);
        let mut x = vec![0.0; z.len()];
        for (new, &old) in self.factor.perm().iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Removes the components along `basis` (two classical passes) and
/// returns the accumulated coefficients.
fn project_out(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        let c: Vec<f64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, ci) in basis.iter().zip(&c) {
            axpy(-ci, v, w);
        }
        for (a, b) in coeffs.iter_mut().zip(&c) {
            *a += b;
        }
    }
    coeffs
}

fn random_unit_orthogonal(basis: &[Vec<f64>], extra: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..3 {
        let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        project_out(basis, &mut r);
        project_out(extra, &mut r);
        let nr = norm(&r);
        if nr > 1e-8 * (n as f64).sqrt() {
            r.iter_mut().for_each(|v| *v /= nr);
            return Some(r);
        }
    }
    None
}

/// Orthonormalizes `w` against `basis` and itself. Returns the new block
/// `Q` and the coefficient rows `R` (`R[q][c]`) with `W = Q R` up to the
/// part already in `basis`. Dependent columns are replaced by random
/// directions with zero rows in `R`. At most `capacity` columns come back.
fn orthonormal_block(
    basis: &[Vec<f64>],
    w: Vec<Vec<f64>>,
    capacity: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = w.first().map_or(0, |v| v.len());
    let width = w.len();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r: Vec<Vec<f64>> = Vec::new();
    for (c, mut col) in w.into_iter().enumerate() {
        if q.len() == capacity {
            break;
        }
        let original = norm(&col).max(f64::MIN_POSITIVE);
        let coeffs = project_out(&q, &mut col);
        for (row, k) in r.iter_mut().zip(&coeffs) {
            row[c] = *k;
        }
        // Heavy cancellation leaves rounding noise that is not orthogonal
        // to anything; repeat against the whole basis until the norm holds.
        let mut before = original;
        let mut nc = norm(&col);
        for _ in 0..3 {
            if nc > 0.5 * before || nc <= DEFLATION_TOL * original {
                break;
            }
            project_out(basis, &mut col);
            let coeffs = project_out(&q, &mut col);
            for (row, k) in r.iter_mut().zip(&coeffs) {
                row[c] += *k;
            }
            before = nc;
            nc = norm(&col);
        }
        let mut row = vec![0.0; width];
        if nc > DEFLATION_TOL * original {
            row[c] = nc;
            col.iter_mut().for_each(|v| *v /= nc);
            q.push(col);
            r.push(row);
        } else if let Some(fresh) = random_unit_orthogonal(basis, &q, n, rng) {
            q.push(fresh);
            r.push(row);
        }
    }
    (q, r)
}

/// Largest `count` eigenvalues of `A⁻¹B` with default options.
pub fn solve_largest(a: &CsrMatrix, b: &CsrMatrix, count: usize, tol: f64, max_iter: usize) -> Result<EigenSolveResult> {
    solve_largest_with(a, b, count, &EigenOptions { tol, max_iter, ..EigenOptions::default() })
}

pub fn solve_largest_with(a: &CsrMatrix, b: &CsrMatrix, count: usize, opts: &EigenOptions) -> Result<EigenSolveResult> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.n() });
    }
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!("eigenvalue count must be in 1..={n}, got {count}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !b.is_symmetric(1e-14 * b.norm_inf()) {
        return Err(Error::InvalidArgument("B must be symmetric".into()));
    }
    let factor = CholeskyFactor::factorize_with(a, FactorOptions { ordering: opts.ordering, ..FactorOptions::default() })?;
    let pb = b.permute_symmetric(factor.perm());
    let scale = factor.diag().iter().map(|d| 1.0 / d.sqrt()).collect();
    let op = Operator { factor, pb, scale };

    let bs = opts.block_size.clamp(1, n);
    let m_max = opts.max_basis.unwrap_or((2 * count).max(count + 6 * bs)).max(count + 2 * bs).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let start: Vec<Vec<f64>> = (0..bs).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let (q0, _) = orthonormal_block(&[], start, bs, &mut rng);
    let mut last = 0..q0.len();
    v.extend(q0);
    let mut h: Vec<Vec<f64>> = vec![vec![0.0; m_max]; m_max];
    let mut iterations = 0;

    loop {
        let mut w = op.apply(&v[last.clone()]);
        iterations += 1;
        for (c, wc) in w.iter_mut().enumerate() {
            let j = last.start + c;
            let coeffs = project_out(&v, wc);
            for (i, &k) in coeffs.iter().enumerate() {
                if i < last.start {
                    h[i][j] = k;
                    h[j][i] = k;
                } else {
                    h[i][j] = k;
                }
            }
        }
        for i in last.clone() {
            for j in last.start..i {
                let s = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = s;
                h[j][i] = s;
            }
        }
        let (q, r) = orthonormal_block(&v, w, n - v.len(), &mut rng);

        let m = v.len();
        let hm = DMatrix::from_fn(m, m, |i, j| h[i][j]);
        let eig = SymmetricEigen::new(hm);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        let wanted = count.min(m);
        let estimates: Vec<f64> = order[..wanted]
            .iter()
            .map(|&k| {
                let s = eig.eigenvectors.column(k);
                let rs: Vec<f64> = (0..r.len())
                    .map(|row| last.clone().map(|j| r[row][j - last.start] * s[j]).sum::<f64>())
                    .collect();
                norm(&rs)
            })
            .collect();

        let ritz_vectors = |cols: &[usize]| -> Vec<Vec<f64>> {
            cols.iter()
                .map(|&k| {
                    let s = eig.eigenvectors.column(k);
                    let mut y = vec![0.0; n];
                    for (j, vj) in v.iter().enumerate() {
                        axpy(s[j], vj, &mut y);
                    }
                    y
                })
                .collect()
        };

        let exhausted = q.is_empty();
        if wanted == count && (exhausted || estimates.iter().all(|&e| e <= opts.tol)) {
            let ys = ritz_vectors(&order[..count]);
            let thetas: Vec<f64> = order[..count].iter().map(|&k| eig.eigenvalues[k]).collect();
            let cy = op.apply(&ys);
            let residuals: Vec<f64> = ys
                .iter()
                .zip(&cy)
                .zip(&thetas)
                .map(|((y, c), t)| norm(&c.iter().zip(y).map(|(ci, yi)| ci - t * yi).collect::<Vec<_>>()))
                .collect();
            if exhausted || residuals.iter().all(|&e| e <= opts.tol) {
                return Ok(finish(&op, ys, thetas, residuals, iterations, opts.group_tol));
            }
        }
        if iterations >= opts.max_iter || exhausted {
            let ys = ritz_vectors(&order[..wanted]);
            let thetas: Vec<f64> = order[..wanted].iter().map(|&k| eig.eigenvalues[k]).collect();
            let max_residual = estimates.iter().cloned().fold(0.0, f64::max);
            let partial = finish(&op, ys, thetas, estimates, iterations, opts.group_tol);
            return Err(Error::EigenNotConverged { restarts: iterations, max_residual, partial: Box::new(partial) });
        }

        if m + q.len() > m_max {
            let keep = (count + (m_max - count - q.len().min(m_max - count)) / 2).max(count).min(m);
            let kept = ritz_vectors(&order[..keep]);
            for row in h.iter_mut() {
                row.iter_mut().for_each(|x| *x = 0.0);
            }
            for (i, &k) in order[..keep].iter().enumerate() {
                h[i][i] = eig.eigenvalues[k];
            }
            v.clear();
            v.extend(kept);
        }
        last = v.len()..v.len() + q.len();
        v.extend(q);
    }
}

fn finish(
    op: &Operator,
    ys: Vec<Vec<f64>>,
    thetas: Vec<f64>,
    residuals: Vec<f64>,
    iterations: usize,
    group_tol: f64,
) -> EigenSolveResult {
    // Descending ν is ascending κ.
    let vectors: Vec<Vec<f64>> = ys.iter().map(|y| op.recover(y)).collect();
    let kappas: Vec<f64> = thetas.iter().map(|t| 1.0 / t).collect();
    let omegas = kappas.iter().map(|k| k - 1.0).collect();
    let multiplicity_groups = group_multiplicities(&kappas, group_tol);
    EigenSolveResult { kappas, omegas, nus: thetas, vectors, residuals, iterations, multiplicity_groups }
}
