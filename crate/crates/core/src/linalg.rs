//! Dense matrix helpers for the small systems that appear here: contrast
//! projections, balance metrics, and Wald statistics. Dimensions never exceed
//! the number of treatment arms or covariates, so a cyclic Jacobi
//! eigendecomposition is plenty.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
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
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// v' M v for square M.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        let mv = self.matvec(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors-as-columns), unordered.
pub fn jacobi_eigen_sym(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("eigen of a non-square matrix".into()));
    }
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + a.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let eig = (0..n).map(|i| a.get(i, i)).collect();
    Ok((eig, v))
}

#[derive(Debug, Clone)]
pub struct PinvInfo {
    pub rank: usize,
    /// Ratio of largest to smallest retained eigenvalue magnitude.
    pub condition: f64,
    /// Eigenvalues at or below the cutoff were zeroed.
    pub clipped: bool,
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix, clipping eigenvalues
/// whose magnitude falls below `rel_tol * max|eigenvalue|`.
pub fn pinv_sym(m: &Mat, rel_tol: f64) -> Result<(Mat, PinvInfo)> {
    let n = m.nrows();
    let (eig, vecs) = jacobi_eigen_sym(m)?;
    let max_abs = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let cutoff = rel_tol * max_abs;
    let mut out = Mat::zeros(n, n);
    let mut rank = 0;
    let mut min_kept = f64::INFINITY;
    for (idx, &lam) in eig.iter().enumerate() {
        if lam.abs() > cutoff && lam.abs() > 0.0 {
            rank += 1;
            min_kept = min_kept.min(lam.abs());
            let inv = 1.0 / lam;
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + inv * vecs.get(i, idx) * vecs.get(j, idx);
                    out.set(i, j, v);
                }
            }
        }
    }
    let condition = if rank == 0 {
        f64::INFINITY
    } else {
        max_abs / min_kept
    };
    Ok((
        out,
        PinvInfo {
            rank,
            condition,
            clipped: rank < n,
        },
    ))
}

/// Symmetric inverse square root, with the same eigenvalue clipping rule.
/// Used to sphere covariates before distance computations.
pub fn inv_sqrt_sym(m: &Mat, rel_tol: f64) -> Result<Mat> {
    let n = m.nrows();
    let (eig, vecs) = jacobi_eigen_sym(m)?;
    let max_abs = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let cutoff = rel_tol * max_abs;
    let mut out = Mat::zeros(n, n);
    for (idx, &lam) in eig.iter().enumerate() {
        if lam > cutoff {
            let w = 1.0 / lam.sqrt();
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + w * vecs.get(i, idx) * vecs.get(j, idx);
                    out.set(i, j, v);
                }
            }
        }
    }
    Ok(out)
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
