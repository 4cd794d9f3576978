//! Dense row-major matrices and the elementwise / product operations used by
//! the task oracles.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::LinalgError;
use crate::scalar::Scalar;

/// Entry-wise matrix norm used to measure prediction error.
///
/// `L2` is the plain sum of squared coefficients (no square root), which is
/// the convention the evaluation protocol is stated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "max" | "l_inf" => Ok(Norm::Linf),
            other => Err(format!("unknown norm `{other}` (expected l1, l2 or linf)")),
        }
    }
}

/// Dense row-major matrix. A vector is an `n x 1` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Build a matrix from row-major data. Rejects empty shapes, length
    /// mismatches and non-finite coefficients.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(LinalgError::Shape(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { T::zero() })
    }

    /// Column vector (`n x 1`).
    pub fn column(values: &[T]) -> Self {
        Self::from_fn(values.len(), 1, |i, _| values[i])
    }

    /// Row vector (`1 x n`).
    pub fn row_vector(values: &[T]) -> Self {
        Self::from_fn(1, values.len(), |_, j| values[j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|x| x * k)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<(), LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Plain product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v` with `v` an `n x 1` column.
    pub fn matvec(&self, v: &Self) -> Result<Self, LinalgError> {
        if v.cols != 1 {
            return Err(LinalgError::Shape(format!(
                "matvec: right operand is {}x{}, expected a column vector",
                v.rows, v.cols
            )));
        }
        self.matmul(v)
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::Shape(format!(
                "transposed matmul: {}x{} (transposed) times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let orow = other.row(k);
            for i in 0..self.cols {
                let a = self[(k, i)];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Entry-wise norm (see [`Norm`]).
    pub fn norm(&self, norm: Norm) -> T {
        match norm {
            Norm::L1 => self.data.iter().map(|x| x.abs()).sum(),
            Norm::L2 => self.data.iter().map(|&x| x * x).sum(),
            Norm::Linf => self.max_abs(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Operator infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    /// `|a_ij - a_ji| <= rel_tol * max|a|` for every pair.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let bound = rel_tol * self.max_abs();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > bound {
                    return false;
                }
            }
        }
        true
    }

    /// Copy of rows `start..end`.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        assert!(start < end && end <= self.rows, "row block out of range");
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Copy of columns `start..end`.
    pub fn col_block(&self, start: usize, end: usize) -> Self {
        assert!(start < end && end <= self.cols, "column block out of range");
        Self::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|&x| U::from_f64(crate::scalar::to_f64(x)).unwrap_or(U::nan()))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn transpose_small() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(a.transpose(), m(&[&[1.0, 3.0], &[2.0, 4.0]]));
        let r = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(r.transpose().shape(), (3, 2));
        assert_eq!(r.transpose().transpose(), r);
    }

    #[test]
    fn add_zero_and_identity_product() {
        let a = m(&[&[1.5, -2.0], &[0.25, 4.0]]);
        assert_eq!(a.add(&Matrix::zeros(2, 2)).unwrap(), a);
        assert_eq!(a.matmul(&Matrix::identity(2)).unwrap(), a);
        assert_eq!(Matrix::identity(2).matmul(&a).unwrap(), a);
    }

    #[test]
    fn matvec_by_definition() {
        // Mᵀ v with M = [[1,2],[3,4]], v = [1,1]: [1+3, 2+4]
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = Matrix::column(&[1.0, 1.0]);
        assert_eq!(a.tr_matmul(&v).unwrap().data(), &[4.0, 6.0]);
        assert_eq!(a.matvec(&v).unwrap().data(), &[3.0, 7.0]);
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::<f64>::zeros(2, 3);
        let b = Matrix::<f64>::zeros(3, 2);
        assert!(matches!(a.add(&b), Err(LinalgError::Shape(_))));
        assert!(matches!(a.matmul(&a), Err(LinalgError::Shape(_))));
        assert!(a.matmul(&b).is_ok());
        assert!(matches!(
            a.matvec(&Matrix::zeros(3, 2)),
            Err(LinalgError::Shape(_))
        ));
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(Matrix::<f64>::new(0, 2, vec![]).is_err());
        assert!(Matrix::<f64>::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn norms() {
        let a = m(&[&[1.0, -2.0], &[0.0, 3.0]]);
        assert_eq!(a.norm(Norm::L1), 6.0);
        assert_eq!(a.norm(Norm::L2), 14.0);
        assert_eq!(a.norm(Norm::Linf), 3.0);
        assert_eq!(a.inf_norm(), 3.0);
        assert!(("linf".parse::<Norm>()).is_ok());
        assert!(("l3".parse::<Norm>()).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[[1.0f32, 2.0], [3.0, 4.0]]).unwrap();
        let p = a.matmul(&a.transpose()).unwrap();
        assert_eq!(p.data(), &[5.0f32, 11.0, 11.0, 25.0]);
    }
}
