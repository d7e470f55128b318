//! Dense reference computations shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::sparse::CsrMatrix;

pub type Dense = Vec<Vec<f64>>;

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Dense) -> Dense {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        assert!(d > 0.0, "matrix is not positive definite");
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            l[i][j] = (a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    l
}

/// Inverse of a lower-triangular matrix.
fn lower_inverse(l: &Dense) -> Dense {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in c..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (c..i).map(|k| l[i][k] * inv[k][c]).sum();
            inv[i][c] = (rhs - s) / l[i][i];
        }
    }
    inv
}

/// Cyclic Jacobi rotations; returns eigenvalues (unsorted) and the
/// eigenvector matrix with vectors as columns.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

/// All ν with `B x = ν A x`, descending, through `L⁻¹ B L⁻ᵀ`.
pub fn generalized_nus(a: &Dense, b: &Dense) -> Vec<f64> {
    let n = a.len();
    let li = lower_inverse(&cholesky(a));
    let mut tmp = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            tmp[i][j] = (0..=i).map(|k| li[i][k] * b[k][j]).sum();
        }
    }
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = (0..=j).map(|k| tmp[i][k] * li[j][k]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = s;
            c[j][i] = s;
        }
    }
    let (mut nus, _) = jacobi_eigen(&c);
    nus.sort_by(|x, y| y.total_cmp(x));
    nus
}

/// Smallest κ of the Steklov pencil `(K + B) x = κ B x`, restricted to the
/// range of `B` (eigenvalues with ν above `1e-12`).
pub fn dense_kappas(k: &CsrMatrix, b: &CsrMatrix) -> Vec<f64> {
    let a = k.add(b, 1.0, 1.0).unwrap().to_dense();
    generalized_nus(&a, &b.to_dense()).into_iter().filter(|nu| *nu > 1e-12).map(|nu| 1.0 / nu).collect()
}

/// Random pair: `A` SPD with spectrum in [1, 10], `B` PSD of the given rank.
pub fn random_pencil(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> (Dense, Dense) {
    let q = random_orthogonal(n, rng);
    let eig_a: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0)).collect();
    let a = conjugate(&q, &eig_a);
    let mut b = vec![vec![0.0; n]; n];
    for _ in 0..rank {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            for j in 0..n {
                b[i][j] += v[i] * v[j];
            }
        }
    }
    (a, b)
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Dense {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-3 {
            cols.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    cols
}

fn conjugate(q: &Dense, d: &[f64]) -> Dense {
    let n = d.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| q[k][i] * d[k] * q[k][j]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
