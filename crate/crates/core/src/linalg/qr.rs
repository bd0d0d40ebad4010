use crate::scalar::Scalar;

use super::dense::{axpy, dot, norm2, Matrix};

/// Householder QR with column pivoting, `A·Π = Q·R`.
#[derive(Clone, Debug)]
pub struct PivotedQr<T> {
    rows: usize,
    reflectors: Vec<(Vec<T>, T)>,
    /// `|R[k][k]|`, nonincreasing.
    pub r_diag: Vec<T>,
    /// Upper triangle of `R`, row-major over the leading `min(rows, cols)` rows.
    r: Matrix<T>,
    /// Column permutation: position `k` holds original column `pivots[k]`.
    pub pivots: Vec<usize>,
}

impl<T: Scalar> PivotedQr<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let (n, q) = (a.rows(), a.cols());
        let mut cols: Vec<Vec<T>> = a.columns();
        let mut pivots: Vec<usize> = (0..q).collect();
        let mut reflectors = Vec::new();
        let mut r_diag = Vec::new();
        for k in 0..n.min(q) {
            let best = (k..q)
                .max_by(|&i, &j| {
                    norm2(&cols[i][k..]).partial_cmp(&norm2(&cols[j][k..])).expect("finite norms").then(j.cmp(&i))
                })
                .expect("nonempty range");
            cols.swap(k, best);
            pivots.swap(k, best);
            let mut v = cols[k][k..].to_vec();
            let alpha = norm2(&v);
            r_diag.push(alpha);
            if alpha == T::zero() {
                reflectors.push((v, T::zero()));
                continue;
            }
            let x0 = v[0];
            let s = if x0 >= T::zero() { -alpha } else { alpha };
            v[0] = x0 - s;
            let beta = T::one() / (s * (s - x0));
            for col in cols.iter_mut().skip(k) {
                let tail = &mut col[k..];
                let c = beta * dot(&v, tail);
                axpy(-c, &v, tail);
            }
            reflectors.push((v, beta));
        }
        let m = n.min(q);
        let r = Matrix::from_fn(m, q, |i, j| if j >= i { cols[j][i] } else { T::zero() });
        Self { rows: n, reflectors, r_diag, pivots, r }
    }

    /// Number of diagonal entries of `R` above `rel_tol · |R[0][0]|`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let top = self.r_diag.first().copied().unwrap_or_else(T::zero);
        if top == T::zero() {
            return 0;
        }
        self.r_diag.iter().take_while(|&&r| r > rel_tol * top).count()
    }

    /// `|R[0][0]| / |R[k][k]|` for the last pivot; a cheap condition estimate.
    pub fn condition_estimate(&self) -> T {
        match (self.r_diag.first(), self.r_diag.last()) {
            (Some(&a), Some(&b)) if b > T::zero() => a / b,
            (Some(_), Some(_)) => T::infinity(),
            _ => T::one(),
        }
    }

    /// `x ← Q·x`.
    pub fn apply_q(&self, x: &mut [T]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == T::zero() {
                continue;
            }
            let tail = &mut x[k..];
            let c = *beta * dot(v, tail);
            axpy(-c, v, tail);
        }
    }

    /// `x ← Qᵀ·x`.
    pub fn apply_qt(&self, x: &mut [T]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate() {
            if *beta == T::zero() {
                continue;
            }
            let tail = &mut x[k..];
            let c = *beta * dot(v, tail);
            axpy(-c, v, tail);
        }
    }

    /// Least-squares solution of `A·c = y` for `A` of full column rank.
    pub fn solve_least_squares(&self, y: &[T]) -> Vec<T> {
        let q = self.pivots.len();
        let mut z = y.to_vec();
        self.apply_qt(&mut z);
        let mut c = vec![T::zero(); q];
        for i in (0..q).rev() {
            let row = self.r.row(i);
            let mut s = z[i];
            for j in i + 1..q {
                s -= row[j] * c[j];
            }
            c[i] = s / row[i];
        }
        let mut out = vec![T::zero(); q];
        for (k, &orig) in self.pivots.iter().enumerate() {
            out[orig] = c[k];
        }
        out
    }

    /// Leading `count` columns of `Q`; for full column rank they span `range(A)`.
    pub fn q_thin(&self, count: usize) -> Matrix<T> {
        let mut q = self.q_columns(0);
        if count < q.cols() {
            q = q.select_columns(&(0..count).collect::<Vec<_>>());
        }
        q
    }

    /// Columns `from..rows` of the full orthogonal factor `Q`.
    pub fn q_columns(&self, from: usize) -> Matrix<T> {
        let n = self.rows;
        let mut out = Matrix::zeros(n, n - from);
        for (j, col) in (from..n).enumerate() {
            let mut e = vec![T::zero(); n];
            e[col] = T::one();
            self.apply_q(&mut e);
            out.set_column(j, &e);
        }
        out
    }
}

/// Default relative rank tolerance: `10 · max(rows, cols) · ε`.
pub fn default_rank_tol<T: Scalar>(rows: usize, cols: usize) -> T {
    T::lit(10.0) * T::from_usize_lossy(rows.max(cols)) * T::epsilon()
}

pub fn column_rank<T: Scalar>(a: &Matrix<T>) -> usize {
    PivotedQr::new(a).rank(default_rank_tol(a.rows(), a.cols()))
}

/// Euclidean-orthonormal basis of the orthogonal complement of `range(a)`,
/// for `a` of full column rank.
pub fn orthonormal_complement<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let qr = PivotedQr::new(a);
    qr.q_columns(a.cols().min(a.rows()))
}
