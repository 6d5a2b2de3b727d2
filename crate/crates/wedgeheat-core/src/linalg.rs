//! Small dense linear algebra: matrices up to a handful of rows for metric
//! work, tall-skinny least squares for expansion fitting.
//!
//! Everything here is allocation-based and dimension-checked at runtime; the
//! sizes involved (chart dimension at most 6, fit bases at most a dozen
//! columns) make specialized storage unnecessary.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::num;
use crate::Result;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from a row-major slice.
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Self { rows, cols, data: data.to_vec() }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Element read.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Element write.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// In-place element update.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| if num::abs(x) > m { num::abs(x) } else { m })
    }

    /// Symmetry defect `max |a_ij - a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut d = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let e = num::abs(self.get(i, j) - self.get(j, i));
                if e > d {
                    d = e;
                }
            }
        }
        d
    }
}

/// Cholesky factor `L` (lower triangular, `A = L L^T`) of a symmetric
/// positive definite matrix; fails with the pivot index otherwise.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err(CoreError::DegenerateMetric { pivot: i });
                }
                l.set(i, j, num::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Mat) -> Result<Mat> {
    let n = a.rows();
    let l = cholesky(a)?;
    let mut inv = Mat::zeros(n, n);
    // Solve L L^T x = e_j for each basis vector.
    for j in 0..n {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l.get(k, i) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
        for i in 0..n {
            inv.set(i, j, x[i]);
        }
    }
    Ok(inv)
}

/// Determinant of a symmetric positive definite matrix via Cholesky.
pub fn spd_determinant(a: &Mat) -> Result<f64> {
    let l = cholesky(a)?;
    let mut d = 1.0;
    for i in 0..a.rows() {
        d *= l.get(i, i);
    }
    Ok(d * d)
}

/// Least-squares solution of `A x = b` by Householder QR.
///
/// Returns the coefficient vector, the residual norm, and the square upper
/// triangular factor `R` (for external conditioning diagnostics). Requires
/// `rows >= cols`.
pub fn householder_lstsq(a: &Mat, b: &[f64]) -> (Vec<f64>, f64, Mat) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "need at least as many rows as columns");
    assert_eq!(b.len(), m);
    let mut q = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        // Householder vector for column k.
        let mut norm = 0.0;
        for i in k..m {
            norm += q.get(i, k) * q.get(i, k);
        }
        let norm = num::sqrt(norm);
        if norm == 0.0 {
            continue;
        }
        let alpha = if q.get(k, k) >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = q.get(k, k) - alpha;
        for i in (k + 1)..m {
            v[i - k] = q.get(i, k);
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        q.set(k, k, alpha);
        for i in (k + 1)..m {
            q.set(i, k, 0.0);
        }
        for j in (k + 1)..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * q.get(i, j);
            }
            let f = 2.0 * dot / vtv;
            for i in k..m {
                q.add_to(i, j, -f * v[i - k]);
            }
        }
        let mut dot = 0.0;
        for i in k..m {
            dot += v[i - k] * y[i];
        }
        let f = 2.0 * dot / vtv;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    // Back substitution on the R block.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= q.get(i, j) * x[j];
        }
        let d = q.get(i, i);
        x[i] = if d != 0.0 { s / d } else { 0.0 };
    }
    let mut resid = 0.0;
    for yi in y.iter().skip(n) {
        resid += yi * yi;
    }
    let mut r = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r.set(i, j, q.get(i, j));
        }
    }
    (x, num::sqrt(resid), r)
}

/// Singular values of a small matrix by one-sided Jacobi rotations,
/// descending order.
pub fn jacobi_singular_values(a: &Mat) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let eps = 1e-14;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    app += u.get(i, p) * u.get(i, p);
                    aqq += u.get(i, q) * u.get(i, q);
                    apq += u.get(i, p) * u.get(i, q);
                }
                let denom = num::sqrt(app * aqq);
                if denom == 0.0 || num::abs(apq) <= eps * denom {
                    continue;
                }
                off = if num::abs(apq) / denom > off { num::abs(apq) / denom } else { off };
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + num::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + num::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    u.set(i, p, c * up - s * uq);
                    u.set(i, q, s * up + c * uq);
                }
            }
        }
        if off < eps {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..m {
                s += u.get(i, j) * u.get(i, j);
            }
            num::sqrt(s)
        })
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Rank-3 tensor with all axes of length `n` (index order `[i][j][k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    /// Zero tensor.
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    /// Axis length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Element read.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Element write.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| if num::abs(x) > m { num::abs(x) } else { m })
    }
}

/// Rank-4 tensor with all axes of length `n` (index order `[i][j][k][l]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    /// Zero tensor.
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    /// Axis length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Element read.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Element write.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| if num::abs(x) > m { num::abs(x) } else { m })
    }
}
