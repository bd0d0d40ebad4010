//! Shift-invert subspace iteration for large sparse pencils.
//!
//! The shifted matrix `A − σB` is factored with an envelope Cholesky under a
//! reverse Cuthill–McKee ordering. Optional linear constraints `C·x = 0` are
//! enforced exactly by a Schur-complement correction of every solve.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

use super::cholesky::{cholesky, Cholesky};
use super::dense::{axpy, dot, norm2, scale_in_place, Matrix, SymMatrix};
use super::gevp::{solve_gevp_with, EigenOptions, EigenResult};
use super::sparse::SparseSymMatrix;
use super::symeig::{sym_eigen, Which};
use super::LinalgError;

/// Orders above this go through the iterative path in [`solve_sparse_gevp`].
pub const DENSE_LIMIT: usize = 3000;

#[derive(Clone, Copy, Debug)]
pub struct IterativeOptions {
    pub seed: u64,
    /// Shift `σ`; `A − σB` must be positive definite (on the constraint space).
    pub shift: f64,
    /// Target relative residual for every returned pair.
    pub tol: f64,
    pub max_iter: usize,
    /// Block size; defaults to `max(2·count, count + 8)`.
    pub block: Option<usize>,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self { seed: 0, shift: 0.0, tol: 1e-11, max_iter: 500, block: None }
    }
}

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn rcm_ordering<T: Scalar>(a: &SparseSymMatrix<T>) -> Vec<usize> {
    let n = a.order();
    let neighbors = |i: usize| a.row(i).0.iter().copied().filter(move |&j| j != i);
    let degree: Vec<usize> = (0..n).map(|i| neighbors(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, seen: &mut Vec<bool>| -> Vec<usize> {
        let mut out = vec![start];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            let mut nb: Vec<usize> = neighbors(v).filter(|&j| !seen[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                seen[j] = true;
                out.push(j);
                q.push_back(j);
            }
        }
        out
    };
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).expect("unvisited node");
        // one sweep toward a pseudo-peripheral node
        let mut probe = visited.clone();
        let reach = bfs_levels(seed, &mut probe);
        let far = *reach.last().expect("nonempty component");
        let start = if degree[far] <= degree[seed] { far } else { seed };
        order.extend(bfs_levels(start, &mut visited));
    }
    order.reverse();
    order
}

/// Envelope (profile) Cholesky factor of a permuted sparse SPD matrix.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> EnvelopeCholesky<T> {
    pub fn factor(a: &SparseSymMatrix<T>, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.order();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for i in 0..n {
            let cols = a.row(perm[i]).0;
            first[i] = cols.iter().map(|&c| inv[c]).filter(|&c| c <= i).min().unwrap_or(i);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![T::zero(); start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        let max_diag = a.diag().into_iter().fold(T::zero(), |m, d| m.max(d.abs()));
        let threshold = T::from_usize_lossy(n) * T::epsilon() * max_diag;
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let s = {
                    let ri = &data[start[i] + k0 - fi..start[i] + j - fi];
                    let rj = &data[start[j] + k0 - fj..start[j] + j - fj];
                    dot(ri, rj)
                };
                let ljj = data[start[j + 1] - 1];
                let p = start[i] + j - fi;
                data[p] = (data[p] - s) / ljj;
            }
            let row = &data[start[i]..start[i + 1] - 1];
            let s = dot(row, row);
            let p = start[i + 1] - 1;
            let pivot = data[p] - s;
            if !(pivot > threshold) {
                return Err(LinalgError::NotPositiveDefinite { index: perm[i], pivot: pivot.to_f64_lossy() });
            }
            data[p] = pivot.sqrt();
        }
        Ok(Self { perm, first, start, data })
    }

    pub fn order(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor (envelope size).
    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.order();
        let mut z: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s = dot(&row[..i - fi], &z[fi..i]);
            z[i] = (z[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = z[i] / row[i - fi];
            z[i] = xi;
            axpy(-xi, &row[..i - fi], &mut z[fi..i]);
        }
        let mut x = vec![T::zero(); n];
        for (i, &old) in self.perm.iter().enumerate() {
            x[old] = z[i];
        }
        x
    }
}

/// Solves `K·u = r + Cᵀ·y`, `C·u = 0` for a factored `K`.
struct ConstrainedSolver<'c, T> {
    chol: EnvelopeCholesky<T>,
    constraints: &'c [Vec<T>],
    k_inv_ct: Vec<Vec<T>>,
    schur: Option<Cholesky<T>>,
}

impl<'c, T: Scalar> ConstrainedSolver<'c, T> {
    fn new(chol: EnvelopeCholesky<T>, constraints: &'c [Vec<T>]) -> Result<Self, LinalgError> {
        let k_inv_ct: Vec<Vec<T>> = constraints.iter().map(|c| chol.solve(c)).collect();
        let schur = if constraints.is_empty() {
            None
        } else {
            let m = constraints.len();
            let s = SymMatrix::from_lower(m, |i, j| dot(&constraints[i], &k_inv_ct[j]));
            Some(cholesky(&s)?)
        };
        Ok(Self { chol, constraints, k_inv_ct, schur })
    }

    fn solve(&self, r: &[T]) -> Vec<T> {
        let mut u = self.chol.solve(r);
        if let Some(s) = &self.schur {
            let t: Vec<T> = self.constraints.iter().map(|c| dot(c, &u)).collect();
            let y = s.solve(&t);
            for (yi, g) in y.iter().zip(&self.k_inv_ct) {
                axpy(-*yi, g, &mut u);
            }
        }
        u
    }
}

/// Euclidean projector onto `{x : C·x = 0}`.
struct ConstraintProjector<'c, T> {
    constraints: &'c [Vec<T>],
    gram: Option<Cholesky<T>>,
}

impl<'c, T: Scalar> ConstraintProjector<'c, T> {
    fn new(constraints: &'c [Vec<T>]) -> Result<Self, LinalgError> {
        let gram = if constraints.is_empty() {
            None
        } else {
            let m = constraints.len();
            let g = SymMatrix::from_lower(m, |i, j| dot(&constraints[i], &constraints[j]));
            Some(cholesky(&g)?)
        };
        Ok(Self { constraints, gram })
    }

    fn project(&self, x: &mut [T]) {
        if let Some(g) = &self.gram {
            let t: Vec<T> = self.constraints.iter().map(|c| dot(c, x)).collect();
            let y = g.solve(&t);
            for (yi, c) in y.iter().zip(self.constraints) {
                axpy(-*yi, c, x);
            }
        }
    }
}

/// The `count` smallest eigenpairs of `a·v = λ·b·v` restricted to
/// `{x : c·x = 0 for every c in constraints}`.
pub fn solve_gevp_iterative<T: Scalar>(
    a: &SparseSymMatrix<T>,
    b: &SparseSymMatrix<T>,
    count: usize,
    constraints: &[Vec<T>],
    opts: &IterativeOptions,
) -> Result<EigenResult<T>, LinalgError> {
    let n = a.order();
    if b.order() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: b.order() });
    }
    if let Some(c) = constraints.iter().find(|c| c.len() != n) {
        return Err(LinalgError::DimensionMismatch { expected: n, found: c.len() });
    }
    let n_eff = n.saturating_sub(constraints.len());
    if count > n_eff {
        return Err(LinalgError::CountExceedsOrder { count, order: n_eff });
    }
    if count == 0 {
        return Ok(EigenResult { values: Vec::new(), vectors: Matrix::zeros(n, 0), residuals: Vec::new(), b_orth_error: T::zero() });
    }
    let block = opts.block.unwrap_or((2 * count).max(count + 8)).clamp(count, n_eff);
    let shifted = a.linear_combination(T::one(), b, -T::lit(opts.shift));
    let chol = EnvelopeCholesky::factor(&shifted, rcm_ordering(&shifted))?;
    let solver = ConstrainedSolver::new(chol, constraints)?;
    let projector = ConstraintProjector::new(constraints)?;

    let norm_a = a.frobenius_norm();
    let norm_b = b.frobenius_norm();
    let tol = T::lit(opts.tol).max(T::lit(100.0) * T::epsilon());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<T> {
        let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        projector.project(&mut v);
        v
    };
    let mut x: Vec<Vec<T>> = (0..block).map(|_| random_vec(&mut rng)).collect();
    let mut last_residual = T::infinity();
    for _ in 0..opts.max_iter {
        let mut y: Vec<Vec<T>> = x.iter().map(|xi| solver.solve(&b.mul_vec(xi))).collect();
        b_orthonormalize(b, &mut y, || random_vec(&mut rng), &projector);
        let ay: Vec<Vec<T>> = y.iter().map(|v| a.mul_vec(v)).collect();
        let reduced = SymMatrix::from_lower(block, |i, j| {
            let half = T::lit(0.5);
            (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])) * half
        });
        let eig = sym_eigen(&reduced, Which::All, opts.seed)?;
        x = (0..block)
            .map(|k| {
                let mut v = vec![T::zero(); n];
                for (j, yj) in y.iter().enumerate() {
                    axpy(eig.vectors[(j, k)], yj, &mut v);
                }
                v
            })
            .collect();
        let residuals: Vec<T> = (0..count)
            .map(|k| {
                let lam = eig.values[k];
                let mut r = a.mul_vec(&x[k]);
                let bx = b.mul_vec(&x[k]);
                axpy(-lam, &bx, &mut r);
                projector.project(&mut r);
                norm2(&r) / (norm_a + lam.abs() * norm_b)
            })
            .collect();
        last_residual = residuals.iter().fold(T::zero(), |m, &r| m.max(r));
        if last_residual <= tol {
            let vectors = Matrix::from_columns(n, &x[..count]);
            let mut orth = T::zero();
            for i in 0..count {
                let bxi = b.mul_vec(&x[i]);
                for j in 0..count {
                    let target = if i == j { T::one() } else { T::zero() };
                    orth = orth.max((dot(&x[j], &bxi) - target).abs());
                }
            }
            return Ok(EigenResult { values: eig.values[..count].to_vec(), vectors, residuals, b_orth_error: orth });
        }
    }
    Err(LinalgError::NoConvergence { iterations: opts.max_iter, residual: last_residual.to_f64_lossy() })
}

fn b_orthonormalize<T: Scalar>(
    b: &SparseSymMatrix<T>,
    y: &mut [Vec<T>],
    mut fresh: impl FnMut() -> Vec<T>,
    projector: &ConstraintProjector<'_, T>,
) {
    let collapse = T::lit(1e-8);
    for k in 0..y.len() {
        let mut attempts = 0;
        loop {
            let before = b_norm(b, &y[k]);
            for _ in 0..2 {
                for j in 0..k {
                    let (done, rest) = y.split_at_mut(k);
                    let c = dot(&done[j], &b.mul_vec(&rest[0]));
                    axpy(-c, &done[j], &mut rest[0]);
                }
            }
            let after = b_norm(b, &y[k]);
            if after > collapse * before && after > T::zero() {
                scale_in_place(&mut y[k], T::one() / after);
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "cannot extend B-orthonormal block");
            let mut v = fresh();
            projector.project(&mut v);
            y[k] = v;
        }
    }
}

fn b_norm<T: Scalar>(b: &SparseSymMatrix<T>, x: &[T]) -> T {
    dot(x, &b.mul_vec(x)).max(T::zero()).sqrt()
}

/// Smallest eigenpairs of a sparse pencil with positive definite `b`: dense
/// reduction up to [`DENSE_LIMIT`], shift-invert subspace iteration beyond.
pub fn solve_sparse_gevp<T: Scalar>(
    a: &SparseSymMatrix<T>,
    b: &SparseSymMatrix<T>,
    count: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>, LinalgError> {
    if count > a.order() {
        return Err(LinalgError::CountExceedsOrder { count, order: a.order() });
    }
    if a.order() <= DENSE_LIMIT {
        solve_gevp_with(&a.to_dense(), &b.to_dense(), count, opts)
    } else {
        let it = IterativeOptions { seed: opts.seed, ..IterativeOptions::default() };
        solve_gevp_iterative(a, b, count, &[], &it)
    }
}
