//! Dense and sparse symmetric linear algebra: Cholesky, symmetric and
//! generalized symmetric eigenproblems, Rayleigh quotients.

mod cholesky;
mod dense;
mod gevp;
mod iterative;
mod sparse;
mod symeig;

pub use cholesky::{cholesky, Cholesky};
pub use dense::{axpy, dot, norm2, Matrix, SymMatrix};
pub use gevp::{
    pair_diagnostics, rayleigh, solve_gevp, solve_gevp_semidefinite, solve_gevp_semidefinite_with, solve_gevp_with,
    split_range_null, EigenOptions, EigenResult, RangeSplit, NULL_SPACE_TOL,
};
pub use iterative::{
    rcm_ordering, solve_gevp_iterative, solve_sparse_gevp, EnvelopeCholesky, IterativeOptions, DENSE_LIMIT,
};
pub use sparse::{SparseSymMatrix, SymTripletBuilder};
pub use symeig::{sym_eigen, sym_eigen_with, tridiagonal_eigenvalues, tridiagonalize, SymEigen, Tridiagonal, VectorMethod, Which};

mod qr;
pub use qr::{column_rank, default_rank_tol, orthonormal_complement, PivotedQr};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("requested {count} eigenpairs but the problem has order {order}")]
    CountExceedsOrder { count: usize, order: usize },
    #[error("right-hand form is numerically zero; the Rayleigh quotient is undefined everywhere")]
    RankZero,
    #[error("vector lies in the kernel of the right-hand form")]
    ZeroDenominator,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("invalid sparse layout: {0}")]
    InvalidSparse(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
