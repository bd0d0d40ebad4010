use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{cholesky, column_rank, sym_eigen, Matrix, PivotedQr, SymMatrix, Which};
use crate::scalar::Scalar;

use super::FrameworkError;

/// Relative tolerance for negative eigenvalues of the `N` Gram matrix.
const SEMIDEFINITE_TOL: f64 = 1e-12;
/// Random factors with a worse pivoted-QR condition estimate are redrawn.
const RANDOM_BASIS_MAX_COND: f64 = 1e3;
/// Cap for the factor `H` of `N = HᵀH`, so that `cond(N)` stays below 1e4.
const RANDOM_FACTOR_MAX_COND: f64 = 1e2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subspace {
    W,
    V,
}

/// A finite-dimensional `X` with Gram matrices of `M` and `N` on a basis of
/// `X`, and column bases of two subspaces `W` and `V`.
#[derive(Clone, Debug)]
pub struct HilbertTriple<T> {
    gram_m: SymMatrix<T>,
    gram_n: SymMatrix<T>,
    basis_w: Matrix<T>,
    basis_v: Matrix<T>,
}

impl<T: Scalar> HilbertTriple<T> {
    /// Validates coercivity of `M`, semidefiniteness of `N`, and full column
    /// rank of both subspace bases.
    pub fn new(
        gram_m: SymMatrix<T>,
        gram_n: SymMatrix<T>,
        basis_w: Matrix<T>,
        basis_v: Matrix<T>,
    ) -> Result<Self, FrameworkError> {
        let n = gram_m.order();
        if n == 0 {
            return Err(FrameworkError::InvalidDims("dim X must be positive".into()));
        }
        if gram_n.order() != n || basis_w.rows() != n || basis_v.rows() != n {
            return Err(FrameworkError::InvalidDims(format!(
                "dim X = {n}, N is {}x{}, W basis has {} rows, V basis has {} rows",
                gram_n.order(),
                gram_n.order(),
                basis_w.rows(),
                basis_v.rows()
            )));
        }
        if basis_w.cols() == 0 || basis_v.cols() == 0 {
            return Err(FrameworkError::InvalidDims("subspaces must be nontrivial".into()));
        }
        cholesky(&gram_m).map_err(|_| FrameworkError::InvalidTriple("M is not coercive (Cholesky failed)".into()))?;
        let lowest = sym_eigen(&gram_n, Which::Smallest(1), 0)?.values[0];
        if lowest < -T::lit(SEMIDEFINITE_TOL) * gram_n.max_diag() {
            return Err(FrameworkError::InvalidTriple(format!("N has a negative eigenvalue {lowest}")));
        }
        for (name, b) in [("W", &basis_w), ("V", &basis_v)] {
            if column_rank(b) < b.cols() {
                return Err(FrameworkError::InvalidTriple(format!("{name} basis is rank deficient")));
            }
        }
        Ok(Self { gram_m, gram_n, basis_w, basis_v })
    }

    pub fn dim_x(&self) -> usize {
        self.gram_m.order()
    }

    pub fn dim_w(&self) -> usize {
        self.basis_w.cols()
    }

    pub fn dim_v(&self) -> usize {
        self.basis_v.cols()
    }

    pub fn gram_m(&self) -> &SymMatrix<T> {
        &self.gram_m
    }

    pub fn gram_n(&self) -> &SymMatrix<T> {
        &self.gram_n
    }

    pub fn basis_w(&self) -> &Matrix<T> {
        &self.basis_w
    }

    pub fn basis_v(&self) -> &Matrix<T> {
        &self.basis_v
    }

    pub fn basis(&self, which: Subspace) -> &Matrix<T> {
        match which {
            Subspace::W => &self.basis_w,
            Subspace::V => &self.basis_v,
        }
    }

    /// Same triple with `N` replaced by `c·N`.
    pub fn with_scaled_n(&self, c: T) -> Self {
        Self { gram_n: self.gram_n.scaled(c), ..self.clone() }
    }

    /// Dimension of the subspace after removing `ker(N)`.
    pub fn effective_dim(&self, which: Subspace) -> usize {
        let y = super::theorem::m_orthonormal_span(&self.gram_m, self.basis(which)).expect("validated basis");
        crate::linalg::split_range_null(&self.gram_n.congruence(&y), 0).range.cols()
    }

    /// `‖x‖²_M` and `‖x‖²_N`.
    pub fn norms_sq(&self, x: &[T]) -> (T, T) {
        (self.gram_m.bilinear(x, x), self.gram_n.bilinear(x, x))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn well_conditioned_basis(rng: &mut ChaCha8Rng, n: usize, cols: usize, max_cond: f64) -> Matrix<f64> {
    loop {
        let b = gaussian(rng, n, cols);
        let qr = PivotedQr::new(&b);
        if qr.rank(crate::linalg::default_rank_tol(n, cols)) == cols && qr.condition_estimate() < max_cond {
            return b;
        }
    }
}

/// Seeded random triple: `M = GᵀG + n·I`, `N = HᵀH` with `H` of random rank
/// in `[max(1, q), n]`, and Gaussian bases for `W` (p columns) and `V`
/// (q columns). The bases are redrawn until their condition estimate is
/// below `RANDOM_BASIS_MAX_COND`, `H` below `RANDOM_FACTOR_MAX_COND`.
/// Fully determined by the seed.
pub fn random_instance<T: Scalar>(seed: u64, n: usize, p: usize, q: usize) -> Result<HilbertTriple<T>, FrameworkError> {
    if n == 0 || p == 0 || q == 0 || p > n || q > n {
        return Err(FrameworkError::InvalidDims(format!("need 1 <= p, q <= n, got n={n}, p={p}, q={q}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(&mut rng, n, n);
    let mut m = SymMatrix::symmetrize(&g.tr_matmul(&g));
    for i in 0..n {
        m.set(i, i, m.get(i, i) + n as f64);
    }
    let r = rng.gen_range(q.max(1)..=n);
    let h = well_conditioned_basis(&mut rng, n, r, RANDOM_FACTOR_MAX_COND).transpose();
    let nn = SymMatrix::symmetrize(&h.tr_matmul(&h));
    let w = well_conditioned_basis(&mut rng, n, p, RANDOM_BASIS_MAX_COND);
    let v = well_conditioned_basis(&mut rng, n, q, RANDOM_BASIS_MAX_COND);
    HilbertTriple::new(m.cast(), nn.cast(), w.cast(), v.cast())
}
