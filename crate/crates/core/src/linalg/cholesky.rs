use crate::scalar::Scalar;

use super::dense::{dot, Matrix, SymMatrix};
use super::LinalgError;

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

/// Factors `a`. A pivot at or below `order · ε · max|diag|` is rejected.
pub fn cholesky<T: Scalar>(a: &SymMatrix<T>) -> Result<Cholesky<T>, LinalgError> {
    let n = a.order();
    let threshold = T::from_usize_lossy(n) * T::epsilon() * a.max_diag();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                if !(s > threshold) {
                    return Err(LinalgError::NotPositiveDefinite { index: i, pivot: s.to_f64_lossy() });
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(Cholesky { l })
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn into_factor(self) -> Matrix<T> {
        self.l
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L·y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.order();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * b[k];
            }
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ·x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [T]) {
        let n = self.order();
        for i in (0..n).rev() {
            let row = self.l.row(i);
            let xi = y[i] / row[i];
            y[i] = xi;
            for k in 0..i {
                y[k] -= row[k] * xi;
            }
        }
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `L⁻¹ · A · L⁻ᵀ` for a symmetric `A`.
    pub fn reduce_congruence(&self, a: &SymMatrix<T>) -> SymMatrix<T> {
        let n = self.order();
        // W = L⁻¹ A
        let mut w = a.as_matrix().clone();
        forward_rows(&self.l, &mut w);
        // row i of C solves L·cᵢ = wᵢ; only entries 0..=i are needed
        let mut c = SymMatrix::zeros(n);
        let mut x = vec![T::zero(); n];
        for i in 0..n {
            let wi = w.row(i);
            for j in 0..=i {
                let lj = self.l.row(j);
                x[j] = (wi[j] - dot(&lj[..j], &x[..j])) / lj[j];
            }
            for (j, &xj) in x.iter().enumerate().take(i + 1) {
                c.set(i, j, xj);
            }
        }
        c
    }
}

/// Overwrites `rhs` with `L⁻¹·rhs`, treating each row of `rhs` as a block row.
fn forward_rows<T: Scalar>(l: &Matrix<T>, rhs: &mut Matrix<T>) {
    let n = l.rows();
    let cols = rhs.cols();
    let mut acc = vec![T::zero(); cols];
    for i in 0..n {
        acc.copy_from_slice(rhs.row(i));
        let li = l.row(i);
        for (k, &lik) in li.iter().enumerate().take(i) {
            if lik == T::zero() {
                continue;
            }
            let rk = rhs.row(k);
            for (a, &r) in acc.iter_mut().zip(rk) {
                *a -= lik * r;
            }
        }
        let inv = T::one() / li[i];
        let ri = rhs.row_mut(i);
        for (dst, &a) in ri.iter_mut().zip(&acc) {
            *dst = a * inv;
        }
    }
}
