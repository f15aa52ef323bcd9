//! Small dense matrices in row-major order.
//!
//! Dimensions in this crate never exceed ten or so, so everything here is the
//! textbook unblocked algorithm.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{AbcError, Result};

/// Pivots at or below this value fail the positive-definiteness check.
pub const SPD_TOL: f64 = 1e-12;
/// Maximum absolute asymmetry accepted by the factorization routines.
pub const SYM_TOL: f64 = 1e-10;
/// Max-abs error allowed when rebuilding a matrix from its Cholesky factor.
pub const RECONSTRUCT_TOL: f64 = 1e-9;
/// Residual tolerance for [`solve_spd`].
pub const SOLVE_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AbcError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Mat { rows, cols, data })
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn column(values: &[f64]) -> Self {
        Mat { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn row_vector(values: &[f64]) -> Self {
        Mat { rows: 1, cols: values.len(), data: values.to_vec() }
    }

    pub fn scalar(v: f64) -> Self {
        Mat { rows: 1, cols: 1, data: vec![v] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(AbcError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(AbcError::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Result<Mat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(AbcError::DimensionMismatch { expected: self.rows * self.cols, got: other.rows * other.cols });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Lower-triangular `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Mat> {
        cholesky(self)
    }

    /// Inverse of a symmetric positive-definite matrix.
    pub fn inverse_spd(&self) -> Result<Mat> {
        let l = cholesky(self)?;
        let n = self.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let x = cholesky_solve(&l, &e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        // Symmetrize to wash out round-off.
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        Ok(inv)
    }

    /// `xᵀ self x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..self.cols {
                s += row[j] * x[j];
            }
            acc += x[i] * s;
        }
        acc
    }

    /// Rank check via Cholesky of the Gram matrix `selfᵀ self`.
    pub fn has_full_column_rank(&self) -> bool {
        let gram = match self.transpose().matmul(self) {
            Ok(g) => g,
            Err(_) => return false,
        };
        let scale = gram.diagonal().iter().cloned().fold(0.0_f64, f64::max);
        if scale <= 0.0 {
            return false;
        }
        cholesky(&gram.scale(1.0 / scale)).is_ok()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
        }
        write!(f, "]")
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub fn cholesky(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(AbcError::DimensionMismatch { expected: m.rows, got: m.cols });
    }
    let asym = m.max_asymmetry();
    if asym > SYM_TOL {
        return Err(AbcError::NotSymmetric { asymmetry: asym });
    }
    let n = m.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > SPD_TOL) {
            return Err(AbcError::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

pub fn solve_spd(m: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.rows() {
        return Err(AbcError::DimensionMismatch { expected: m.rows(), got: b.len() });
    }
    let l = cholesky(m)?;
    Ok(cholesky_solve(&l, b))
}

/// `log det` of an SPD matrix from its Cholesky factor.
pub fn log_det_from_cholesky(l: &Mat) -> f64 {
    l.diagonal().iter().map(|d| 2.0 * d.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&Mat::identity(2)).unwrap();
        assert_eq!(l, Mat::identity(2));
    }

    #[test]
    fn cholesky_diagonal() {
        let l = cholesky(&Mat::diag(&[4.0, 9.0])).unwrap();
        assert_eq!(l, Mat::diag(&[2.0, 3.0]));
    }

    #[test]
    fn cholesky_reconstructs_two_by_two() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let l = cholesky(&m).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-12);
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(cholesky(&m), Err(AbcError::NotPositiveDefinite { index: 1, .. })));
        assert!(matches!(cholesky(&Mat::zeros(2, 2)), Err(AbcError::NotPositiveDefinite { index: 0, .. })));
    }

    #[test]
    fn cholesky_rejects_asymmetric() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]);
        assert!(matches!(cholesky(&m), Err(AbcError::NotSymmetric { .. })));
    }

    #[test]
    fn solve_identity_and_diagonal() {
        assert_eq!(solve_spd(&Mat::identity(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let x = solve_spd(&Mat::diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < SOLVE_TOL), "{x:?}");
    }

    #[test]
    fn solve_checks_dimensions() {
        assert!(matches!(
            solve_spd(&Mat::identity(2), &[1.0]),
            Err(AbcError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn inverse_spd_roundtrip() {
        let m = Mat::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]]);
        let inv = m.inverse_spd().unwrap();
        assert!(m.matmul(&inv).unwrap().max_abs_diff(&Mat::identity(3)) < 1e-12);
    }

    #[test]
    fn column_rank() {
        assert!(Mat::column(&[1.0, 0.5]).has_full_column_rank());
        assert!(!Mat::column(&[0.0, 0.0]).has_full_column_rank());
        let collinear = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        assert!(!collinear.has_full_column_rank());
    }
}
