use crate::scalar::Scalar;

use super::dense::SymMatrix;
use super::LinalgError;

/// Symmetric matrix in compressed sparse row form. Both triangles are stored
/// and mirrored entries are bitwise equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix<T> {
    order: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Accumulates upper-triangle contributions; duplicates are summed in
/// insertion order, then mirrored.
#[derive(Clone, Debug)]
pub struct SymTripletBuilder<T> {
    order: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SymTripletBuilder<T> {
    pub fn new(order: usize) -> Self {
        Self { order, entries: Vec::new() }
    }

    /// Adds `v` at `(i, j)`; the pair is canonicalized to the upper triangle.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.order && j < self.order, "triplet ({i},{j}) out of range {}", self.order);
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> SparseSymMatrix<T> {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut upper: Vec<(usize, usize, T)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match upper.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => upper.push((r, c, v)),
            }
        }
        let n = self.order;
        let mut counts = vec![0usize; n];
        for &(r, c, _) in &upper {
            counts[r] += 1;
            if r != c {
                counts[c] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        let mut fill = row_ptr[..n].to_vec();
        // lower part first (columns < row), emitted in increasing column order
        for &(r, c, v) in &upper {
            if r != c {
                let p = fill[c];
                col_idx[p] = r;
                values[p] = v;
                fill[c] += 1;
            }
        }
        for &(r, c, v) in &upper {
            let p = fill[r];
            col_idx[p] = c;
            values[p] = v;
            fill[r] += 1;
        }
        SparseSymMatrix { order: n, row_ptr, col_idx, values }
    }
}

impl<T: Scalar> SparseSymMatrix<T> {
    pub fn from_dense(a: &SymMatrix<T>) -> Self {
        let mut b = SymTripletBuilder::new(a.order());
        for i in 0..a.order() {
            for j in i..a.order() {
                let v = a.get(i, j);
                if v != T::zero() {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn identity(order: usize) -> Self {
        let mut b = SymTripletBuilder::new(order);
        for i in 0..order {
            b.add(i, i, T::one());
        }
        b.build()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(T::zero(), |p| vals[p])
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.order];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.order, "mul_vec shape");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            *yi = s;
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.order).map(|i| self.row(i).1.iter().copied().sum()).collect()
    }

    pub fn total_sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn to_dense(&self) -> SymMatrix<T> {
        let mut d = SymMatrix::zeros(self.order);
        for i in 0..self.order {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c <= i {
                    d.set(i, c, v);
                }
            }
        }
        d
    }

    /// `alpha·self + beta·other` on the union pattern.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!(self.order, other.order, "order mismatch");
        let mut b = SymTripletBuilder::new(self.order);
        for (m, w) in [(self, alpha), (other, beta)] {
            for i in 0..m.order {
                let (cols, vals) = m.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if c >= i {
                        b.add(i, c, w * v);
                    }
                }
            }
        }
        b.build()
    }

    /// Checks sorted, in-range, duplicate-free indices and bitwise symmetry.
    pub fn check_invariants(&self) -> Result<(), LinalgError> {
        let n = self.order;
        if self.row_ptr.len() != n + 1 || self.row_ptr[n] != self.values.len() || self.col_idx.len() != self.values.len() {
            return Err(LinalgError::InvalidSparse("row pointer layout".into()));
        }
        for i in 0..n {
            let (cols, vals) = self.row(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidSparse(format!("row {i} indices not strictly increasing")));
            }
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= n {
                    return Err(LinalgError::InvalidSparse(format!("row {i} column {c} out of range")));
                }
                let (tc, tv) = self.row(c);
                match tc.binary_search(&i) {
                    Ok(p) if tv[p] == v => {}
                    _ => return Err(LinalgError::NotSymmetric { row: i, col: c }),
                }
            }
        }
        Ok(())
    }
}
