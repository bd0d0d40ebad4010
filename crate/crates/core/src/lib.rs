//! Guaranteed two-sided eigenvalue bounds.
//!
//! A lower bound for the eigenvalues of a symmetric pencil on a space `W` is
//! obtained from the eigenvalues on a second space `V` through
//! `λ_k(V) / (1 + α²·λ_k(V)) ≤ λ_k(W)`, where `α` bounds the `N`-norm of the
//! `M`-orthogonal projection error onto `V` by its `M`-norm. The
//! [`framework`] module computes every ingredient exactly on finite
//! dimensional spaces; [`fem`] and [`bounds`] apply it to the Dirichlet
//! Laplacian with Crouzeix–Raviart elements for `V` and P1 elements for the
//! upper bound.
//!
//! Linear algebra and the abstract framework are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix `f64`.

pub mod bounds;
pub mod cli;
pub mod fem;
pub mod framework;
pub mod linalg;
pub mod mesh;
mod scalar;

pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type SparseSymMatrix64 = linalg::SparseSymMatrix<f64>;
pub type EigenResult64 = linalg::EigenResult<f64>;
pub type HilbertTriple64 = framework::HilbertTriple<f64>;
pub type TheoremReport64 = framework::TheoremReport<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type SymMatrix32 = linalg::SymMatrix<f32>;
pub type HilbertTriple32 = framework::HilbertTriple<f32>;
