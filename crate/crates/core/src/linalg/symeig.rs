//! Dense symmetric eigensolver: Householder tridiagonalization, implicit QL
//! for the spectrum, and either explicit accumulation (small orders) or
//! inverse iteration on the tridiagonal form (large orders) for vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

use super::dense::{axpy, dot, norm2, scale_in_place, Matrix, SymMatrix};
use super::LinalgError;

/// Orders at or below this use QL with explicit eigenvector accumulation.
pub const ACCUMULATE_LIMIT: usize = 64;

const QL_MAX_SWEEPS: usize = 60;
const INVERSE_ITERATIONS: usize = 4;

/// Which part of the spectrum to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Smallest(usize),
    Largest(usize),
    All,
}

/// How eigenvectors are obtained from the tridiagonal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorMethod {
    Auto,
    Accumulate,
    InverseIteration,
}

/// Selected eigenpairs of a symmetric matrix, ascending.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Matrix<T>,
}

/// Householder reduction `A = Q·T·Qᵀ` with `Q` kept as reflectors.
#[derive(Clone, Debug)]
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    // reflector k acts on coordinates k+1.. as I − β·v·vᵀ
    reflectors: Vec<(Vec<T>, T)>,
}

/// Householder vector for `x`: `(I − β·v·vᵀ)·x = s·e₁`. Returns `(v, β, s)`.
fn householder<T: Scalar>(mut x: Vec<T>) -> (Vec<T>, T, T) {
    let alpha = norm2(&x);
    if alpha == T::zero() {
        return (x, T::zero(), T::zero());
    }
    let x0 = x[0];
    let s = if x0 >= T::zero() { -alpha } else { alpha };
    x[0] = x0 - s;
    (x, T::one() / (s * (s - x0)), s)
}

/// `p = β·A·v` for the trailing block of `w` starting at `offset`, read from
/// the lower triangle.
fn lower_matvec<T: Scalar>(w: &Matrix<T>, offset: usize, v: &[T], beta: T, p: &mut [T]) {
    p.iter_mut().for_each(|x| *x = T::zero());
    for i in 0..v.len() {
        let row = &w.row(offset + i)[offset..offset + i + 1];
        p[i] += dot(row, &v[..=i]);
        axpy(v[i], &row[..i], &mut p[..i]);
    }
    scale_in_place(p, beta);
}

pub fn tridiagonalize<T: Scalar>(a: &SymMatrix<T>) -> Tridiagonal<T> {
    let n = a.order();
    // only the lower triangle of `w` is kept current
    let mut w = a.as_matrix().clone();
    let mut diag = vec![T::zero(); n];
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(n.saturating_sub(2));
    if n >= 3 {
        let (v, beta, s) = householder((1..n).map(|i| w[(i, 0)]).collect());
        let mut p = vec![T::zero(); n - 1];
        lower_matvec(&w, 1, &v, beta, &mut p);
        let mut current = (v, beta, s, p);
        for k in 0..n - 2 {
            let (v, beta, s, mut p) = current;
            diag[k] = w[(k, k)];
            off[k] = s;
            let m = v.len();
            let kk = beta * T::lit(0.5) * dot(&p, &v);
            for (pi, &vi) in p.iter_mut().zip(&v) {
                *pi -= kk * vi;
            }
            let has_next = k + 1 < n - 2;
            // the next column is known before the block update, so the update
            // pass can also accumulate the next matrix-vector product
            let (nv, nbeta, ns) = if has_next {
                householder((1..m).map(|i| w[(k + 1 + i, k + 1)] - (v[i] * p[0] + p[i] * v[0])).collect())
            } else {
                (Vec::new(), T::zero(), T::zero())
            };
            let mut np = vec![T::zero(); m.saturating_sub(1)];
            for i in 0..m {
                let (vi, wi) = (v[i], p[i]);
                let row = &mut w.row_mut(k + 1 + i)[k + 1..k + 2 + i];
                for ((r, &pj), &vj) in row.iter_mut().zip(p.iter()).zip(&v) {
                    *r -= vi * pj + wi * vj;
                }
                if has_next && i >= 1 {
                    let tail = &row[1..];
                    np[i - 1] += dot(tail, &nv[..i]);
                    axpy(nv[i - 1], &tail[..i - 1], &mut np[..i - 1]);
                }
            }
            reflectors.push((v, beta));
            scale_in_place(&mut np, nbeta);
            current = (nv, nbeta, ns, np);
        }
    }
    if n >= 2 {
        diag[n - 2] = w[(n - 2, n - 2)];
        off[n - 2] = w[(n - 1, n - 2)];
    }
    if n >= 1 {
        diag[n - 1] = w[(n - 1, n - 1)];
    }
    Tridiagonal { diag, off, reflectors }
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// `x ← Q·x`.
    pub fn apply_q(&self, x: &mut [T]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == T::zero() {
                continue;
            }
            let tail = &mut x[k + 1..];
            let c = *beta * dot(v, tail);
            axpy(-c, v, tail);
        }
    }

    pub fn explicit_q(&self) -> Matrix<T> {
        let n = self.order();
        let mut q = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            self.apply_q(&mut e);
            q.set_column(j, &e);
        }
        q
    }

    /// Max absolute row sum of the tridiagonal matrix.
    pub fn norm1(&self) -> T {
        let n = self.order();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }
}

/// Implicit QL with Wilkinson-type shifts. When `z` is given, the rotations
/// are accumulated into its columns. On return `d` holds the (unsorted)
/// eigenvalues.
fn ql_implicit<T: Scalar>(
    d: &mut [T],
    off: &[T],
    mut z: Option<&mut Matrix<T>>,
) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![T::zero(); n];
    e[..n - 1].copy_from_slice(off);
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(LinalgError::NoConvergence { iterations: sweeps, residual: e[l].to_f64_lossy() });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.rows() {
                        let f = z[(k, i + 1)];
                        let zi = z[(k, i)];
                        z[(k, i + 1)] = s * zi + c * f;
                        z[(k, i)] = c * zi - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn tridiagonal_eigenvalues<T: Scalar>(diag: &[T], off: &[T]) -> Result<Vec<T>, LinalgError> {
    let mut d = diag.to_vec();
    ql_implicit(&mut d, off, None)?;
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// LU factorization with partial pivoting of `T − λI` for inverse iteration.
struct ShiftedTridiagonalLu<T> {
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    mult: Vec<T>,
    swap: Vec<bool>,
}

impl<T: Scalar> ShiftedTridiagonalLu<T> {
    fn new(diag: &[T], off: &[T], lambda: T, tiny: T) -> Self {
        let n = diag.len();
        let mut u0 = vec![T::zero(); n];
        let mut u1 = vec![T::zero(); n];
        let mut u2 = vec![T::zero(); n];
        let mut mult = vec![T::zero(); n.saturating_sub(1)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let guard = |p: T| if p.abs() < tiny { tiny.copysign(p) } else { p };
        let (mut p, mut q, mut r) = (diag[0] - lambda, off.first().copied().unwrap_or_default(), T::zero());
        for i in 0..n - 1 {
            let sub = off[i];
            let dn = diag[i + 1] - lambda;
            let sn = if i + 2 < n { off[i + 1] } else { T::zero() };
            if p.abs() >= sub.abs() {
                let pp = guard(p);
                let m = sub / pp;
                u0[i] = pp;
                u1[i] = q;
                u2[i] = r;
                mult[i] = m;
                (p, q, r) = (dn - m * q, sn - m * r, T::zero());
            } else {
                let m = p / sub;
                u0[i] = sub;
                u1[i] = dn;
                u2[i] = sn;
                mult[i] = m;
                swap[i] = true;
                (p, q, r) = (q - m * dn, r - m * sn, T::zero());
            }
        }
        u0[n - 1] = guard(p);
        Self { u0, u1, u2, mult, swap }
    }

    fn solve_in_place(&self, b: &mut [T]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}

/// Eigenvectors of the tridiagonal matrix for the given ascending
/// eigenvalues, by inverse iteration with reorthogonalization inside clusters.
fn tridiagonal_vectors<T: Scalar>(
    diag: &[T],
    off: &[T],
    values: &[T],
    seed: u64,
) -> Vec<Vec<T>> {
    let n = diag.len();
    let tnorm = {
        let t = Tridiagonal { diag: diag.to_vec(), off: off.to_vec(), reflectors: Vec::new() };
        t.norm1().max(T::min_positive_value())
    };
    let eps = T::epsilon();
    let ortol = T::lit(1e-3) * tnorm;
    let pertol = T::lit(10.0) * eps * tnorm;
    let tiny = eps * tnorm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<T>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    let mut last_shift = T::neg_infinity();
    for (j, &lambda) in values.iter().enumerate() {
        if j > 0 && lambda - values[j - 1] > ortol {
            cluster_start = j;
        }
        let mut shift = lambda;
        if j > cluster_start && shift - last_shift < pertol {
            shift = last_shift + pertol;
        }
        last_shift = shift;
        let lu = ShiftedTridiagonalLu::new(diag, off, shift, tiny);
        let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        for _ in 0..INVERSE_ITERATIONS {
            lu.solve_in_place(&mut x);
            for _ in 0..2 {
                for prev in &out[cluster_start..j] {
                    let c = dot(prev, &x);
                    axpy(-c, prev, &mut x);
                }
            }
            let nrm = norm2(&x);
            if nrm == T::zero() || !nrm.is_finite() {
                x = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
                continue;
            }
            scale_in_place(&mut x, T::one() / nrm);
        }
        out.push(x);
    }
    out
}

fn select_indices(n: usize, which: Which) -> Result<std::ops::Range<usize>, LinalgError> {
    match which {
        Which::All => Ok(0..n),
        Which::Smallest(c) if c <= n => Ok(0..c),
        Which::Largest(c) if c <= n => Ok(n - c..n),
        Which::Smallest(c) | Which::Largest(c) => Err(LinalgError::CountExceedsOrder { count: c, order: n }),
    }
}

pub fn sym_eigen<T: Scalar>(a: &SymMatrix<T>, which: Which, seed: u64) -> Result<SymEigen<T>, LinalgError> {
    sym_eigen_with(a, which, VectorMethod::Auto, seed)
}

pub fn sym_eigen_with<T: Scalar>(
    a: &SymMatrix<T>,
    which: Which,
    method: VectorMethod,
    seed: u64,
) -> Result<SymEigen<T>, LinalgError> {
    let n = a.order();
    let range = select_indices(n, which)?;
    if n == 0 || range.is_empty() {
        return Ok(SymEigen { values: Vec::new(), vectors: Matrix::zeros(n, 0) });
    }
    let tri = tridiagonalize(a);
    let accumulate = match method {
        VectorMethod::Accumulate => true,
        VectorMethod::InverseIteration => false,
        VectorMethod::Auto => n <= ACCUMULATE_LIMIT,
    };
    if accumulate {
        let mut q = tri.explicit_q();
        let mut d = tri.diag.clone();
        ql_implicit(&mut d, &tri.off, Some(&mut q))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
        let picked = &order[range];
        let values = picked.iter().map(|&i| d[i]).collect();
        let vectors = q.select_columns(picked);
        return Ok(SymEigen { values, vectors });
    }
    let all = tridiagonal_eigenvalues(&tri.diag, &tri.off)?;
    let values: Vec<T> = all[range].to_vec();
    let tvecs = tridiagonal_vectors(&tri.diag, &tri.off, &values, seed);
    let mut vectors = Matrix::zeros(n, values.len());
    for (j, mut v) in tvecs.into_iter().enumerate() {
        tri.apply_q(&mut v);
        vectors.set_column(j, &v);
    }
    Ok(SymEigen { values, vectors })
}
