//! Small dense row-major matrices and a pivot-reporting Cholesky factorization.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor `L` with `L Lᵀ = A`, plus the smallest pivot seen.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    pub lower: Matrix<T>,
    pub smallest_pivot: T,
}

/// Pivot tolerance relative to `sqrt(max diag)`. A rank-deficient matrix
/// leaves pivots of order `sqrt(n * eps)` after rounding, so the threshold
/// sits above `sqrt(eps)`.
pub fn default_pivot_tolerance<T: Real>() -> T {
    T::epsilon().sqrt() * T::of(8.0)
}

/// Factorize a symmetric matrix. Fails with [`Error::NotPositiveDefinite`]
/// when a pivot (diagonal of `L`) falls to `tol * sqrt(max diag)` or below.
pub fn cholesky<T: Real>(a: &Matrix<T>, tol: T) -> Result<Cholesky<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky of a non-square matrix");
    let scale = (0..n)
        .fold(T::zero(), |m, i| m.max(a[(i, i)].abs()))
        .sqrt()
        .max(T::min_positive_value());
    let mut l = Matrix::zeros(n, n);
    let mut smallest = T::infinity();
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        let pivot = if d > T::zero() { d.sqrt() } else { -(-d).sqrt() };
        smallest = smallest.min(pivot);
        if !(pivot > tol * scale) {
            return Err(Error::NotPositiveDefinite {
                smallest_pivot: pivot.to_f64_lossy(),
                row: j,
            });
        }
        l[(j, j)] = pivot;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s = s - ri[k] * rj[k];
            }
            l[(i, j)] = s / pivot;
        }
    }
    Ok(Cholesky {
        lower: l,
        smallest_pivot: smallest,
    })
}

impl<T: Real> Cholesky<T> {
    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let l = &self.lower;
        let n = l.rows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    }

    /// `B A⁻¹` for a matrix `B` with `n` columns (`A` symmetric).
    pub fn right_divide(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut out = b.clone();
        let n = b.cols();
        let mut row = vec![T::zero(); n];
        for i in 0..b.rows() {
            row.copy_from_slice(b.row(i));
            self.solve_in_place(&mut row);
            for j in 0..n {
                out[(i, j)] = row[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve() {
        let a = Matrix::from_rows(&[
            vec![4.0f64, 2.0, 0.4],
            vec![2.0, 3.0, 0.5],
            vec![0.4, 0.5, 2.0],
        ]);
        let c = cholesky(&a, 1e-12).unwrap();
        let back = c.lower.mul(&c.lower.transpose());
        assert!(back.max_abs_diff(&a) < 1e-14);
        let mut b = vec![1.0, 2.0, 3.0];
        c.solve_in_place(&mut b);
        let ab = a.mul_vec(&b);
        for (x, y) in ab.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        match cholesky(&a, default_pivot_tolerance()) {
            Err(Error::NotPositiveDefinite { row, smallest_pivot }) => {
                assert_eq!(row, 1);
                assert!(smallest_pivot.abs() < 1e-7);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let c = cholesky(&a, default_pivot_tolerance()).unwrap();
        assert!((c.lower[(1, 1)] - 1.5f32.sqrt()).abs() < 1e-6);
    }
}
