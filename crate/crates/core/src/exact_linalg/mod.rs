//! Exact integer and rational linear algebra.
//!
//! Everything here is generic over an exact integer scalar (`i64`, `i128`,
//! `BigInt`). Callers that cannot bound their intermediate values use the
//! `BigInt` aliases exported from the crate root.

mod det;
mod smith;
mod solve;

use std::fmt;
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use thiserror::Error;

pub use det::{
    adjugate, cofactor_det, det, fraction_free_det, is_negative_definite, leading_principal_minors,
};
pub use smith::{smith_normal_form, SmithForm};
pub use solve::{rational_quadratic_eval, solve_rational};

/// An exact, signed integer type usable as a matrix entry.
pub trait Scalar:
    Integer + Signed + Clone + Ord + Hash + fmt::Debug + fmt::Display + FromPrimitive + ToPrimitive
{
}

impl<T> Scalar for T where
    T: Integer + Signed + Clone + Ord + Hash + fmt::Debug + fmt::Display + FromPrimitive + ToPrimitive
{
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("degenerate form")]
    Degenerate,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry does not fit the target scalar type")]
    Overflow,
}

/// Dense row-major matrix with exact integer entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape { rows, cols, got: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have equal length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::Dimension(format!(
                    "ragged rows: expected {cols} entries, got {}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[T]>>(rows: usize, columns: &[C]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(LinalgError::Dimension(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Ok(m)
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect())
    }

    pub fn neg(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x.clone()).collect() }
    }

    pub fn scale(&self, k: &T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * k.clone()).collect(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_violation().is_none()
    }

    fn symmetry_violation(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Converts every entry into another scalar type, failing on overflow.
    pub fn try_cast<U: Scalar>(&self) -> Result<Matrix<U>, LinalgError> {
        let data = self
            .data
            .iter()
            .map(|x| x.to_i128().and_then(U::from_i128).ok_or(LinalgError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    /// Lossless widening conversion (e.g. `i64` to `BigInt`).
    pub fn widen<U: Scalar + From<T>>(&self) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().cloned().map(U::from).collect() }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &self.data)
            .finish()
    }
}

/// A square symmetric integer matrix: the intersection form of a lattice.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gram<T>(Matrix<T>);

impl<T: Scalar> Gram<T> {
    pub fn new(m: Matrix<T>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.rows, cols: m.cols });
        }
        if let Some((row, col)) = m.symmetry_violation() {
            return Err(LinalgError::NotSymmetric { row, col });
        }
        Ok(Gram(m))
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, LinalgError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn rank(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rank()).map(|i| self.0[(i, i)].clone()).collect()
    }

    /// `xᵀ Q y`.
    pub fn pairing(&self, x: &[T], y: &[T]) -> T {
        let qy = self.0.mul_vec(y).expect("pairing: vector length must match rank");
        x.iter().zip(&qy).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn try_cast<U: Scalar>(&self) -> Result<Gram<U>, LinalgError> {
        Ok(Gram(self.0.try_cast()?))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Gram<T> {
    type Output = T;
    fn index(&self, idx: (usize, usize)) -> &T {
        &self.0[idx]
    }
}
