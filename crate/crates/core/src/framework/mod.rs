//! Exact finite-dimensional instantiation of the max-min lower-bound
//! framework: a space `X` with forms `M` (coercive) and `N` (positive
//! semidefinite), subspaces `W` and `V`, the `M`-orthogonal projector onto
//! `V`, the optimal projection constant `α`, and checks of the bound
//! `λ_k(V) / (1 + α²·λ_k(V)) ≤ λ_k(W)` together with its proof chain.

mod theorem;
mod triple;

pub use theorem::{
    exact_alpha, lower_bound_transform, m_orthonormal_complement, m_orthonormal_span, m_projector, subspace_eigenvalues, verify_maxmin_chain,
    verify_theorem, AlphaEstimate, ChainLink, ChainReport, TheoremReport,
};
pub use triple::{random_instance, HilbertTriple, Subspace};

use thiserror::Error;

use crate::linalg::LinalgError;

/// Relative slack for floating-point checks of non-strict inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error("invalid Hilbert triple: {0}")]
    InvalidTriple(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("Gram matrix of the V basis under M is not positive definite")]
    SingularGram,
    #[error("eigenvalue must be positive, got {0}")]
    NonpositiveEigenvalue(f64),
    #[error("projection constant must be nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `lhs ≥ rhs` up to the relative slack, with `+∞` on the left always passing.
pub(crate) fn holds_geq(lhs: f64, rhs: f64) -> bool {
    lhs == f64::INFINITY || lhs >= rhs - INEQUALITY_SLACK * rhs.abs().max(lhs.abs()).max(1.0)
}
