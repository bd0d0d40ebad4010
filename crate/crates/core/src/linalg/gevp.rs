use crate::scalar::Scalar;

use super::cholesky::cholesky;
use super::dense::{dot, norm2, Matrix, SymMatrix};
use super::symeig::{sym_eigen, Which};
use super::LinalgError;

/// Eigenpairs of `A·v = λ·B·v`, ascending, with `B`-orthonormal vectors.
#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns.
    pub vectors: Matrix<T>,
    /// `‖A v − λ B v‖ / (‖A‖_F + |λ|·‖B‖_F)` per pair.
    pub residuals: Vec<T>,
    /// `max |Vᵀ B V − I|`.
    pub b_orth_error: T,
}

impl<T: Scalar> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }

    /// Keeps the first `count` pairs.
    pub fn truncated(mut self, count: usize) -> Self {
        let count = count.min(self.values.len());
        let keep: Vec<usize> = (0..count).collect();
        self.values.truncate(count);
        self.residuals.truncate(count);
        self.vectors = self.vectors.select_columns(&keep);
        self
    }
}

/// Options shared by the eigen drivers.
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Seed for every randomized starting vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { seed: 0 }
    }
}

/// Relative residuals and `B`-orthonormality defect of a set of pairs.
pub fn pair_diagnostics<T: Scalar>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    values: &[T],
    vectors: &Matrix<T>,
) -> (Vec<T>, T) {
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    let mut bv_cols = Vec::with_capacity(values.len());
    let residuals = values
        .iter()
        .enumerate()
        .map(|(k, &lam)| {
            let v = vectors.column(k);
            let av = a.mul_vec(&v);
            let bv = b.mul_vec(&v);
            let r: Vec<T> = av.iter().zip(&bv).map(|(&x, &y)| x - lam * y).collect();
            bv_cols.push(bv);
            let denom = na + lam.abs() * nb;
            if denom > T::zero() {
                norm2(&r) / denom
            } else {
                norm2(&r)
            }
        })
        .collect();
    let mut orth = T::zero();
    for i in 0..values.len() {
        let vi = vectors.column(i);
        for (j, bvj) in bv_cols.iter().enumerate() {
            let g = dot(&vi, bvj);
            let target = if i == j { T::one() } else { T::zero() };
            orth = orth.max((g - target).abs());
        }
    }
    (residuals, orth)
}

/// The `count` smallest eigenpairs of `a·v = λ·b·v` for symmetric `a` and
/// positive definite `b`, via Cholesky reduction to a standard problem.
pub fn solve_gevp<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>, count: usize) -> Result<EigenResult<T>, LinalgError> {
    solve_gevp_with(a, b, count, &EigenOptions::default())
}

pub fn solve_gevp_with<T: Scalar>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    count: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>, LinalgError> {
    let n = a.order();
    if b.order() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: b.order() });
    }
    if count > n {
        return Err(LinalgError::CountExceedsOrder { count, order: n });
    }
    let chol = cholesky(b)?;
    let c = chol.reduce_congruence(a);
    let eig = sym_eigen(&c, Which::Smallest(count), opts.seed)?;
    let mut vectors = Matrix::zeros(n, count);
    for k in 0..count {
        let mut y = eig.vectors.column(k);
        chol.solve_upper_in_place(&mut y);
        vectors.set_column(k, &y);
    }
    let (residuals, b_orth_error) = pair_diagnostics(a, b, &eig.values, &vectors);
    Ok(EigenResult { values: eig.values, vectors, residuals, b_orth_error })
}

/// Relative threshold (against the largest diagonal entry of `b`) below which
/// an eigenvalue of `b` marks a null direction.
pub const NULL_SPACE_TOL: f64 = 1e-12;

/// Orthonormal bases of the numerical range and null space of a positive
/// semidefinite matrix.
pub struct RangeSplit<T> {
    pub range: Matrix<T>,
    pub null: Matrix<T>,
}

pub fn split_range_null<T: Scalar>(b: &SymMatrix<T>, seed: u64) -> RangeSplit<T> {
    let n = b.order();
    let threshold = T::lit(NULL_SPACE_TOL) * b.max_diag();
    let eig = sym_eigen(b, Which::All, seed).expect("eigen decomposition of a symmetric matrix");
    let (null_idx, range_idx): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| !(eig.values[i] > threshold));
    RangeSplit { range: eig.vectors.select_columns(&range_idx), null: eig.vectors.select_columns(&null_idx) }
}

/// Finite eigenpairs of `a·v = λ·b·v` for positive definite `a` and positive
/// semidefinite `b`.
///
/// Solved through the reciprocal pencil `b·v = μ·a·v` reduced by the
/// Cholesky factor of `a`, so `λ = 1/μ` keeps full relative accuracy for the
/// smallest `λ` even when `b` is badly conditioned. `null(b)` corresponds to
/// `μ = 0` and is dropped; every returned eigenvector is `a`-orthogonal to
/// it. The number of returned pairs equals the numerical rank of `b`
/// (eigenvalues of `b` above `NULL_SPACE_TOL · max diag(b)`).
pub fn solve_gevp_semidefinite<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<EigenResult<T>, LinalgError> {
    solve_gevp_semidefinite_with(a, b, &EigenOptions::default())
}

pub fn solve_gevp_semidefinite_with<T: Scalar>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    opts: &EigenOptions,
) -> Result<EigenResult<T>, LinalgError> {
    let n = a.order();
    if b.order() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: b.order() });
    }
    let rank = split_range_null(b, opts.seed).range.cols();
    if rank == 0 || b.max_diag() == T::zero() {
        return Err(LinalgError::RankZero);
    }
    let chol = cholesky(a)?;
    let c = chol.reduce_congruence(b);
    let eig = sym_eigen(&c, Which::Largest(rank), opts.seed)?;
    // largest μ first, i.e. smallest λ first
    let kept: Vec<usize> = (0..rank).rev().filter(|&i| eig.values[i] > T::zero()).collect();
    let values: Vec<T> = kept.iter().map(|&i| T::one() / eig.values[i]).collect();
    let mut vectors = Matrix::zeros(n, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        let mut y = eig.vectors.column(i);
        chol.solve_upper_in_place(&mut y);
        let scale = T::one() / eig.values[i].sqrt();
        y.iter_mut().for_each(|x| *x *= scale);
        vectors.set_column(k, &y);
    }
    let (residuals, b_orth_error) = pair_diagnostics(a, b, &values, &vectors);
    Ok(EigenResult { values, vectors, residuals, b_orth_error })
}

/// `(xᵀ a x) / (xᵀ b x)`.
pub fn rayleigh<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>, x: &[T]) -> Result<T, LinalgError> {
    let n = a.order();
    if x.len() != n || b.order() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: x.len() });
    }
    let den = b.bilinear(x, x);
    let tol = T::from_usize_lossy(n) * T::epsilon() * b.max_diag() * dot(x, x);
    if !(den > tol) {
        return Err(LinalgError::ZeroDenominator);
    }
    Ok(a.bilinear(x, x) / den)
}
