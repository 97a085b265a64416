//! Small dense linear algebra: just enough for covariance submatrices.
//!
//! Everything here targets the dense-covariance path, which only ever sees
//! modest dimensions; the large-dimension experiments all run through the
//! diagonal fast paths and never allocate a matrix. The eigensolver is a
//! cyclic Jacobi iteration (Golub & Van Loan §8.5): slow in the O(d^3)
//! constant but unconditionally convergent on symmetric input and easy to
//! audit, which matters more than speed at these sizes.

// Index-based loops mirror the matrix algebra they implement.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Eigenvalues below this floor mark the matrix as numerically singular.
/// Problems that trip it are rejected rather than regularized, so every
/// downstream bound is evaluated on the matrix the caller actually supplied.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyVector);
        }
        let cols = rows[0].len();
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    left: cols,
                    right: r.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Scale row `i` by `scale[i]` in place (left-multiplication by a
    /// diagonal matrix).
    pub fn scale_rows(&mut self, scale: &[f64]) {
        assert_eq!(scale.len(), self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                self.data[i * self.cols + j] *= scale[i];
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Operator norm induced by the vector sup-norm: the maximum absolute row
/// sum. Defined for rectangular input.
pub fn op_norm_inf(m: &Mat) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Check symmetry within `tol`; returns the offending pair on failure.
pub fn check_symmetric(m: &Mat, tol: f64) -> Result<()> {
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            let delta = (m[(i, j)] - m[(j, i)]).abs();
            if delta > tol {
                return Err(Error::NotSymmetric { i, j, delta });
            }
        }
    }
    Ok(())
}

/// Eigendecomposition `A = V diag(values) V^T` of a symmetric matrix,
/// eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Cyclic Jacobi diagonalization. The caller is responsible for symmetry;
/// only the upper triangle drives the rotations but the full matrix is
/// updated, so mild asymmetry within the symmetry check tolerance is fine.
pub fn sym_eigen(m: &Mat) -> SymEigen {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Mat::identity(n);

    let frob: f64 = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (frob * 1e-14).max(f64::MIN_POSITIVE);

    for _sweep in 0..128 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() * std::f64::consts::SQRT_2 <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= stop / (n as f64 * n as f64) {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J with the Givens rotation J in the (p,q) plane
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * aqj;
                    a[(q, j)] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, src)];
        }
    }
    SymEigen { values, vectors }
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values[0]
    }

    /// Error out if any eigenvalue sits at or below the positive-definite
    /// floor.
    pub fn require_positive_definite(&self) -> Result<()> {
        if self.min_eigenvalue() <= EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveDefinite {
                value: self.min_eigenvalue(),
                floor: EIGENVALUE_FLOOR,
            });
        }
        Ok(())
    }

    /// Build `V f(diag) V^T`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            let fv = f(self.values[k]);
            if fv == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)];
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += fv * vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }

    /// Apply `V f(diag) V^T` to a vector without materializing the matrix.
    pub fn apply_fn_vec(&self, f: impl Fn(f64) -> f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // y = V^T b
        let mut y = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.vectors[(i, k)] * b[i];
            }
            y[k] = f(self.values[k]) * acc;
        }
        // out = V y
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += self.vectors[(i, k)] * y[k];
            }
            out[i] = acc;
        }
        out
    }

    /// Solve `A x = b` through the decomposition.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.apply_fn_vec(|l| 1.0 / l, b)
    }

    /// `A^{-1/2} b`.
    pub fn inv_sqrt_vec(&self, b: &[f64]) -> Vec<f64> {
        self.apply_fn_vec(|l| 1.0 / l.sqrt(), b)
    }

    /// `A^{1/2} b`.
    pub fn sqrt_vec(&self, b: &[f64]) -> Vec<f64> {
        self.apply_fn_vec(f64::sqrt, b)
    }

    /// Materialize `A^{-1/2}`.
    pub fn inv_sqrt_mat(&self) -> Mat {
        self.apply_fn(|l| 1.0 / l.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn op_norm_inf_examples() {
        assert_eq!(op_norm_inf(&Mat::identity(5)), 1.0);
        let m = mat(&[&[1.0, -2.0], &[3.0, 0.5]]);
        assert_eq!(op_norm_inf(&m), 3.5);
    }

    #[test]
    fn eigen_2x2_correlation() {
        // [[1, r], [r, 1]] has eigenvalues 1 - r and 1 + r
        for &r in &[0.0, 0.3, 0.5, 0.9, -0.7] {
            let m = mat(&[&[1.0, r], &[r, 1.0]]);
            let e = sym_eigen(&m);
            assert!((e.values[0] - (1.0 - r.abs())).abs() < 1e-12);
            assert!((e.values[1] - (1.0 + r.abs())).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = mat(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, -0.25], &[0.5, -0.25, 2.0]]);
        let e = sym_eigen(&m);
        let back = e.apply_fn(|l| l);
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - m[(i, j)]).abs() < 1e-12);
            }
        }
        // eigenvectors orthonormal
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|i| e.vectors[(i, a)] * e.vectors[(i, b)]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let m = mat(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = sym_eigen(&m);
        let inv_sqrt = e.inv_sqrt_mat();
        let inv = inv_sqrt.mul(&inv_sqrt);
        let should_be_identity = inv.mul(&m);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((should_be_identity[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_small_system() {
        // [[2,1],[1,2]] w = (1,1)  =>  w = (1/3, 1/3)
        let m = mat(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = sym_eigen(&m);
        let w = e.solve(&[1.0, 1.0]);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn positive_definite_floor() {
        let m = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let e = sym_eigen(&m);
        assert!(matches!(
            e.require_positive_definite(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn symmetry_check() {
        let m = mat(&[&[1.0, 0.5], &[0.25, 1.0]]);
        assert!(check_symmetric(&m, 1e-10).is_err());
        assert!(check_symmetric(&m, 0.5).is_ok());
    }

    #[test]
    fn random_round_trip_larger() {
        // random symmetric PD via A = B^T B + eps I
        let n = 12;
        let mut s = crate::rng::Stream::substream(7, crate::rng::PURPOSE_AUX, 0);
        let mut b = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = s.standard_normal();
            }
        }
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b[(k, i)] * b[(k, j)];
                }
                a[(i, j)] = acc + if i == j { 0.5 } else { 0.0 };
            }
        }
        let e = sym_eigen(&a);
        e.require_positive_definite().unwrap();
        let back = e.apply_fn(|l| l);
        let scale = op_norm_inf(&a);
        for i in 0..n {
            for j in 0..n {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-11 * scale);
            }
        }
        // inverse square root round trip at relative 1e-8
        let inv_sqrt = e.inv_sqrt_mat();
        let inv_via_sqrt = inv_sqrt.mul(&inv_sqrt);
        let ident = inv_via_sqrt.mul(&a);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ident[(i, j)] - expect).abs() < 1e-8);
            }
        }
    }
}
