use std::fmt;
use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

use super::LinalgError;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch { expected: c, found: usize::MAX });
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "column length");
            m.set_column(j, col);
        }
        m
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
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                axpy(aik, rhs.row(k), out_row);
            }
        }
        out
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn tr_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "tr_matmul shape");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let rk = rhs.row(k);
            for (i, &aki) in self.row(k).iter().enumerate() {
                if aki == T::zero() {
                    continue;
                }
                axpy(aki, rk, &mut out.data[i * rhs.cols..(i + 1) * rhs.cols]);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "mul_vec shape");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · x`.
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.rows, x.len(), "tr_mul_vec shape");
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), &mut out);
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * c).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "sub shape");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
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

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols.max(1)) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

/// Dense symmetric matrix. Writes go through [`SymMatrix::set`], which mirrors
/// the value, so the stored matrix is exactly symmetric at all times.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    inner: Matrix<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(order: usize) -> Self {
        Self { inner: Matrix::zeros(order, order) }
    }

    pub fn identity(order: usize) -> Self {
        Self { inner: Matrix::identity(order) }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a generator evaluated on the lower triangle only.
    pub fn from_lower(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts a square matrix whose entries are exactly symmetric.
    pub fn from_matrix(m: Matrix<T>) -> Result<Self, LinalgError> {
        if m.rows() != m.cols() {
            return Err(LinalgError::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: &Matrix<T>) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetrize needs a square matrix");
        let half = T::lit(0.5);
        Self::from_lower(m.rows(), |i, j| (m[(i, j)] + m[(j, i)]) * half)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        self.inner.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.order()).map(|i| self.get(i, i)).collect()
    }

    pub fn max_diag(&self) -> T {
        self.diag().into_iter().fold(T::zero(), |m, d| m.max(d.abs()))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        self.inner.mul_vec(x)
    }

    /// `xᵀ · self · y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(x, &self.mul_vec(y))
    }

    pub fn frobenius_norm(&self) -> T {
        self.inner.frobenius_norm()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { inner: self.inner.scaled(c) }
    }

    /// Congruence `Sᵀ · self · S`, symmetrized.
    pub fn congruence(&self, s: &Matrix<T>) -> Self {
        let ms = self.inner.matmul(s);
        Self::symmetrize(&s.tr_matmul(&ms))
    }

    pub fn cast<U: Scalar>(&self) -> SymMatrix<U> {
        SymMatrix { inner: self.inner.cast() }
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.inner)
    }
}

#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    // eight independent partial sums, combined in a fixed order
    let mut acc = [T::zero(); 8];
    let xc = x.chunks_exact(8);
    let yc = y.chunks_exact(8);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for l in 0..8 {
            acc[l] += a[l] * b[l];
        }
    }
    let mut tail = T::zero();
    for (&a, &b) in xr.iter().zip(yr) {
        tail += a * b;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += a · x`
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

pub fn scale_in_place<T: Scalar>(x: &mut [T], c: T) {
    for v in x {
        *v *= c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_writes_mirror() {
        let mut s = SymMatrix::<f64>::zeros(3);
        s.set(2, 0, 5.0);
        assert_eq!(s.get(0, 2), 5.0);
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).is_err());
    }

    #[test]
    fn products_agree() {
        let a = Matrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 1.0);
        let b = Matrix::from_fn(3, 4, |i, j| (i as f64) - (j as f64));
        let direct = a.transpose().matmul(&b);
        assert_eq!(a.tr_matmul(&b), direct);
        let x = [1.0, -2.0, 0.5];
        assert_eq!(a.tr_mul_vec(&x), a.transpose().mul_vec(&x));
    }
}
