//! Independent oracles shared by the integration tests. Nothing here calls
//! into the factorizations or eigensolvers under test.
#![allow(dead_code)]

use eigbound::mesh::{structured_rectangle, TriangleMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows).map(|_| (0..cols).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter().map(|r| (0..cols).map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum()).collect()).collect()
}

pub fn mat_vec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn quad(a: &Dense, x: &[f64]) -> f64 {
    mat_vec(a, x).iter().zip(x).map(|(p, q)| p * q).sum()
}

/// `SᵀAS`, symmetrized.
pub fn congruence(a: &Dense, s: &Dense) -> Dense {
    symmetrize(matmul(&transpose(s), &matmul(a, s)))
}

/// Random SPD matrix `GᵀG + shift·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Dense {
    let g = gaussian(rng, n, n);
    let mut a = matmul(&transpose(&g), &g);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += shift;
    }
    symmetrize(a)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let g = gaussian(rng, n, n);
    symmetrize((0..n).map(|i| (0..n).map(|j| g[i][j] + g[j][i]).collect()).collect())
}

fn symmetrize(mut a: Dense) -> Dense {
    for i in 0..a.len() {
        for j in 0..i {
            let v = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

/// Number of eigenvalues of the pencil `(a, b)` below `x`, for `b` positive
/// definite: the negative inertia of `a − x·b` (Sylvester), read off an
/// unpivoted `LDLᵀ`.
pub fn count_below(a: &Dense, b: &Dense, x: f64) -> usize {
    let n = a.len();
    let mut s: Dense = (0..n).map(|i| (0..n).map(|j| a[i][j] - x * b[i][j]).collect()).collect();
    let scale = s.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut negatives = 0;
    for k in 0..n {
        let mut d = s[k][k];
        if d == 0.0 {
            d = -f64::EPSILON * scale;
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = s[i][k] / d;
            for j in k + 1..n {
                s[i][j] -= f * s[k][j];
            }
        }
    }
    negatives
}

/// All eigenvalues of `(a, b)` by bisection on the inertia count.
pub fn bisection_eigenvalues(a: &Dense, b: &Dense, lo: f64, hi: f64) -> Vec<f64> {
    bisection_lowest(a, b, lo, hi, a.len())
}

/// The `count` smallest eigenvalues of `(a, b)` in `[lo, hi]` by bisection.
pub fn bisection_lowest(a: &Dense, b: &Dense, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h {
                    break;
                }
                if count_below(a, b, mid) > k {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Gershgorin bound on the spectrum of `a`.
pub fn gershgorin(a: &Dense) -> f64 {
    a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Modified Gram–Schmidt on the columns of `a`; columns whose remainder
/// falls below `tol` times their original norm are dropped.
pub fn orthonormal_columns(a: &Dense, tol: f64) -> Dense {
    let cols = transpose(a);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let norm0 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = c;
        for _ in 0..2 {
            for q in &basis {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol * norm0 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    transpose(&basis)
}

pub fn to_dense<T: Copy + Into<f64>>(rows: usize, cols: usize, get: impl Fn(usize, usize) -> T) -> Dense {
    (0..rows).map(|i| (0..cols).map(|j| get(i, j).into()).collect()).collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Degree-5 seven-point rule on a triangle, barycentric points and weights
/// normalized to sum to 1.
pub fn seven_point_rule() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let (a1, a2) = ((6.0 - s) / 21.0, (6.0 + s) / 21.0);
    let (b1, b2) = (1.0 - 2.0 * a1, 1.0 - 2.0 * a2);
    let (w1, w2) = ((155.0 - s) / 1200.0, (155.0 + s) / 1200.0);
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Element {
    P1,
    Cr,
}

/// Element matrices by quadrature: barycentric gradients from the inverse
/// Jacobian, basis `λ_i` (P1) or `1 − 2λ_i` (CR).
pub fn quadrature_local(p: [[f64; 2]; 3], element: Element) -> (Dense, Dense) {
    let j = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let area = 0.5 * det.abs();
    // rows of J⁻¹ are the gradients of λ₁ and λ₂
    let g1 = [j[1][1] / det, -j[0][1] / det];
    let g2 = [-j[1][0] / det, j[0][0] / det];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    let grads = [g0, g1, g2];
    let (phi_scale, phi_shift) = match element {
        Element::P1 => (1.0, 0.0),
        Element::Cr => (-2.0, 1.0),
    };
    let mut k = vec![vec![0.0; 3]; 3];
    let mut m = vec![vec![0.0; 3]; 3];
    for (bary, w) in seven_point_rule() {
        let phi: Vec<f64> = bary.iter().map(|l| phi_shift + phi_scale * l).collect();
        for a in 0..3 {
            for b in 0..3 {
                let ga = [phi_scale * grads[a][0], phi_scale * grads[a][1]];
                let gb = [phi_scale * grads[b][0], phi_scale * grads[b][1]];
                k[a][b] += w * area * (ga[0] * gb[0] + ga[1] * gb[1]);
                m[a][b] += w * area * phi[a] * phi[b];
            }
        }
    }
    (k, m)
}

/// Global Dirichlet matrices with free dofs numbered by ascending vertex
/// index (P1) or by lexicographic sorted vertex pair (CR).
pub fn quadrature_assembly(vertices: &[[f64; 2]], triangles: &[[usize; 3]], element: Element) -> (Dense, Dense) {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edge_use = std::collections::BTreeMap::new();
    for t in triangles {
        for i in 0..3 {
            *edge_use.entry(key(t[(i + 1) % 3], t[(i + 2) % 3])).or_insert(0usize) += 1;
        }
    }
    let mut on_boundary = vec![false; vertices.len()];
    for (&(a, b), &c) in &edge_use {
        if c == 1 {
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
    }
    let mut dof = std::collections::BTreeMap::new();
    match element {
        Element::P1 => {
            for v in (0..vertices.len()).filter(|&v| !on_boundary[v]) {
                let id = dof.len();
                dof.insert((v, v), id);
            }
        }
        Element::Cr => {
            for (&e, &c) in &edge_use {
                if c == 2 {
                    let id = dof.len();
                    dof.insert(e, id);
                }
            }
        }
    }
    let n = dof.len();
    let (mut k, mut m) = (vec![vec![0.0; n]; n], vec![vec![0.0; n]; n]);
    for t in triangles {
        let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
        let (kl, ml) = quadrature_local(p, element);
        let ids: Vec<Option<usize>> = (0..3)
            .map(|i| match element {
                Element::P1 => dof.get(&(t[i], t[i])).copied(),
                Element::Cr => dof.get(&key(t[(i + 1) % 3], t[(i + 2) % 3])).copied(),
            })
            .collect();
        for a in 0..3 {
            for b in 0..3 {
                if let (Some(i), Some(j)) = (ids[a], ids[b]) {
                    k[i][j] += kl[a][b];
                    m[i][j] += ml[a][b];
                }
            }
        }
    }
    (k, m)
}

/// Structured rectangle with interior vertices jittered by up to 15% of the
/// smaller cell side. At most 50 triangles.
pub fn random_small_mesh(seed: u64) -> TriangleMesh {
    let mut r = rng(seed);
    let nx = r.gen_range(2..=5usize);
    let ny = r.gen_range(2..=(25 / nx).min(5));
    let (w, h) = (r.gen_range(0.5..2.0), r.gen_range(0.5..2.0));
    let base = structured_rectangle(nx, ny, w, h).expect("valid dims");
    let cell = (w / nx as f64).min(h / ny as f64);
    let boundary = base.boundary_vertices();
    let vertices: Vec<[f64; 2]> = base
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &[x, y])| {
            if boundary[i] {
                [x, y]
            } else {
                [x + 0.15 * cell * r.gen_range(-1.0..1.0), y + 0.15 * cell * r.gen_range(-1.0..1.0)]
            }
        })
        .collect();
    TriangleMesh::new(vertices, base.triangles().to_vec()).expect("jitter keeps orientation")
}

/// Solves `A·X = B` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut a = a.clone();
    let mut b = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).expect("nonempty");
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            for j in 0..b[i].len() {
                b[i][j] -= f * b[k][j];
            }
        }
    }
    let cols = b.first().map_or(0, Vec::len);
    let mut x = vec![vec![0.0; cols]; n];
    for i in (0..n).rev() {
        for c in 0..cols {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j][c]).sum();
            x[i][c] = (b[i][c] - s) / a[i][i];
        }
    }
    x
}

/// `V·(VᵀMV)⁻¹·VᵀM` by normal equations.
pub fn projector_oracle(m: &Dense, v: &Dense) -> Dense {
    let mv = matmul(m, v);
    let gram = matmul(&transpose(v), &mv);
    matmul(v, &solve_dense(&gram, &transpose(&mv)))
}
