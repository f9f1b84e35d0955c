//! Small dense linear algebra: row-major matrices, symmetric eigendecomposition
//! (cyclic Jacobi), and Cholesky solves.
//!
//! The barrier Hessians this crate works with are symmetric positive-definite
//! and tiny (order `d + 1` with `d ≲ 50`), so a self-contained Jacobi sweep is
//! both fast enough and bitwise deterministic — there is no pivoting or
//! blocking that could reorder floating-point operations between runs.

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};
use crate::math;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must match dimensions");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = dot(row, x);
        }
        y
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `xᵀ · self · y`.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    math::sqrt(norm_sq(a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], alpha: f64) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigendecomposition `A = V diag(values) Vᵀ` of a symmetric matrix.
///
/// Eigenvalues are sorted ascending; `vectors` holds the corresponding
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// Applies `V f(Λ) Vᵀ` to a vector.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64, x: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for (j, &lambda) in self.values.iter().enumerate() {
            let mut proj = 0.0;
            for i in 0..n {
                proj += self.vectors.get(i, j) * x[i];
            }
            let coeff = f(lambda) * proj;
            for i in 0..n {
                y[i] += coeff * self.vectors.get(i, j);
            }
        }
        y
    }

    /// Builds the symmetric matrix `V f(Λ) Vᵀ`.
    pub fn matrix_fn(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut m = Matrix::zeros(n, n);
        for (j, &lambda) in self.values.iter().enumerate() {
            let coeff = f(lambda);
            for r in 0..n {
                let vr = coeff * self.vectors.get(r, j);
                if vr == 0.0 {
                    continue;
                }
                for c in 0..n {
                    let val = m.get(r, c) + vr * self.vectors.get(c, j);
                    m.set(r, c, val);
                }
            }
        }
        // Symmetrize to kill last-bit asymmetry from the accumulation order.
        for r in 0..n {
            for c in (r + 1)..n {
                let avg = 0.5 * (m.get(r, c) + m.get(c, r));
                m.set(r, c, avg);
                m.set(c, r, avg);
            }
        }
        m
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Symmetric eigendecomposition via cyclic Jacobi sweeps.
///
/// The input must be symmetric; only the upper triangle is trusted (the lower
/// is overwritten by symmetry during the sweep). Converges quadratically; for
/// the matrix sizes used here a handful of sweeps reaches machine precision.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    assert_eq!(a.rows, a.cols, "sym_eigen requires a square matrix");
    let n = a.rows;
    let mut m = a.data.clone();
    // Enforce exact symmetry of the working copy.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let mut v = Matrix::identity(n).data;

    let total_sq: f64 = m.iter().map(|x| x * x).sum();
    let tol_sq = total_sq * 1e-30;

    const MAX_SWEEPS: usize = 64;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off_sq: f64 = off_diagonal_sq(&m, n);
        if off_sq <= tol_sq {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_sq(&m, n) > tol_sq {
        return Err(Error::NoConvergence {
            iterations: MAX_SWEEPS,
            residual: math::sqrt(off_diagonal_sq(&m, n)),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));

    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v[row * n + old_col]);
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_sq(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * m[i * n + j] * m[i * n + j];
        }
    }
    s
}

fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + math::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m[k * n + p] = new_kp;
        m[p * n + k] = new_kp;
        m[k * n + q] = new_kq;
        m[q * n + k] = new_kq;
    }
    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows, a.cols, "cholesky requires a square matrix");
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::IllConditioned {
                        min_eigenvalue: sum,
                    });
                }
                l.set(i, j, math::sqrt(sum));
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves `A x = b` given the lower Cholesky factor of `A`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    // Forward substitution L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    // Back substitution Lᵀ x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    x
}

/// Solves the symmetric positive-definite system `A x = b`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(cholesky_solve(&cholesky(a)?, b))
}
