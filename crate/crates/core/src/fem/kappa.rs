use std::f64::consts::SQRT_2;

use super::{assemble_unconstrained, ElementKind, FemError};
use crate::linalg::{
    solve_gevp_iterative, solve_gevp_with, EigenOptions, IterativeOptions, SparseSymMatrix, SymMatrix, DENSE_LIMIT,
};
use crate::mesh::{signed_area, Point, TriangleMesh};

pub const DEFAULT_KAPPA_DEPTH: usize = 6;

/// Safety factor applied to the reference constant before it scales α.
pub const KAPPA_INFLATION: f64 = 1.02;

/// Unit right triangle on which `kappa_ref` is defined.
pub const REFERENCE_TRIANGLE: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingRule {
    /// `κ(T) = kappa·√2·σ_max(B)` for the affine map `x̂ ↦ B·x̂ + b` from the
    /// unit right triangle onto `T`, minimized over the three choices of the
    /// image of the right-angle corner. Equals `kappa·diam(T)` on right
    /// isosceles triangles and exceeds it otherwise.
    AffineSingularValue,
}

/// CR interpolation constant on the unit right triangle:
/// `‖v‖₀ ≤ kappa_ref·|v|₁` for `v` with zero mean on each edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaEstimate {
    pub kappa_ref: f64,
    pub refine_depth: usize,
    /// Smallest constrained Rayleigh quotient, `kappa_ref = 1/√mu_min`.
    pub mu_min: f64,
    pub scaling: ScalingRule,
    /// Whether [`KAPPA_INFLATION`] is applied when scaling to elements.
    pub inflated: bool,
}

impl KappaEstimate {
    pub fn inflated_value(&self) -> f64 {
        KAPPA_INFLATION * self.kappa_ref
    }

    /// Copy that scales with the inflated constant.
    pub fn inflated(&self) -> Self {
        Self { inflated: true, ..*self }
    }

    /// Value multiplied into every element constant.
    pub fn scale_value(&self) -> f64 {
        if self.inflated {
            self.inflated_value()
        } else {
            self.kappa_ref
        }
    }
}

/// Computes `kappa_ref` from P1 on the unit right triangle refined
/// `refine_depth` times, with the three edge-mean constraints imposed.
pub fn cr_interpolation_constant(refine_depth: usize) -> Result<KappaEstimate, FemError> {
    if refine_depth < 2 {
        return Err(FemError::DepthTooSmall(refine_depth));
    }
    let mu_min = reference_eigenvalue(REFERENCE_TRIANGLE, refine_depth, true)?;
    Ok(KappaEstimate {
        kappa_ref: 1.0 / mu_min.sqrt(),
        refine_depth,
        mu_min,
        scaling: ScalingRule::AffineSingularValue,
        inflated: false,
    })
}

/// Smallest eigenvalue of `|v|₁² / ‖v‖₀²` over P1 functions on `tri` refined
/// `depth` times; with `constrained`, restricted to zero mean on each of the
/// three sides of `tri`.
pub fn reference_eigenvalue(tri: [Point; 3], depth: usize, constrained: bool) -> Result<f64, FemError> {
    reference_eigenvalue_via(tri, depth, constrained, None)
}

fn reference_eigenvalue_via(mut tri: [Point; 3], depth: usize, constrained: bool, force_dense: Option<bool>) -> Result<f64, FemError> {
    if constrained && depth == 0 {
        // three constraints on three nodes leave nothing
        return Err(FemError::DepthTooSmall(0));
    }
    if signed_area(tri[0], tri[1], tri[2]) < 0.0 {
        tri.swap(1, 2);
    }
    let coarse = TriangleMesh::new(tri.to_vec(), vec![[0, 1, 2]])?;
    let mesh = coarse.refine_red_times(depth);
    let (a, b) = assemble_unconstrained(&mesh, ElementKind::P1Conforming)?;
    let constraints = if constrained { side_mean_functionals(&mesh, &tri) } else { Vec::new() };
    let n = a.order();
    let dense = force_dense.unwrap_or(n - constraints.len() <= DENSE_LIMIT);
    let mu = if dense {
        let (ar, br) = eliminate(&a, &b, &constraints, &mesh);
        solve_gevp_with(&ar, &br, 1, &EigenOptions::default())?.values[0]
    } else {
        // the unconstrained stiffness is singular; shift below zero
        let opts = IterativeOptions { shift: -1.0, ..IterativeOptions::default() };
        solve_gevp_iterative(&a, &b, 1, &constraints, &opts)?.values[0]
    };
    Ok(mu)
}

/// One normalized functional per side of `tri`: `c·v = ∫_side v / |side|`.
/// Side `s` is the side opposite corner `s`.
fn side_mean_functionals(mesh: &TriangleMesh, tri: &[Point; 3]) -> Vec<Vec<f64>> {
    let total = signed_area(tri[0], tri[1], tri[2]);
    let mut c = vec![vec![0.0; mesh.num_vertices()]; 3];
    let mut side_len = [0.0; 3];
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        if !mesh.boundary_edges()[e] {
            continue;
        }
        let (vp, vq) = (mesh.vertices()[p], mesh.vertices()[q]);
        let mid = [0.5 * (vp[0] + vq[0]), 0.5 * (vp[1] + vq[1])];
        // barycentric coordinate of the midpoint that vanishes identifies the side
        let s = (0..3)
            .min_by(|&i, &j| {
                let bi = signed_area(mid, tri[(i + 1) % 3], tri[(i + 2) % 3]).abs();
                let bj = signed_area(mid, tri[(j + 1) % 3], tri[(j + 2) % 3]).abs();
                bi.total_cmp(&bj)
            })
            .expect("three sides");
        debug_assert!(signed_area(mid, tri[(s + 1) % 3], tri[(s + 2) % 3]).abs() < 1e-12 * total);
        let len = mesh.edge_length(e);
        c[s][p] += 0.5 * len;
        c[s][q] += 0.5 * len;
        side_len[s] += len;
    }
    for (ci, len) in c.iter_mut().zip(side_len) {
        ci.iter_mut().for_each(|x| *x /= len);
    }
    c
}

/// Dense pencil on the constraint space: one non-corner node per side is
/// expressed through the remaining nodes of that side.
fn eliminate(
    a: &SparseSymMatrix<f64>,
    b: &SparseSymMatrix<f64>,
    constraints: &[Vec<f64>],
    mesh: &TriangleMesh,
) -> (SymMatrix<f64>, SymMatrix<f64>) {
    let n = a.order();
    let (ad, bd) = (a.to_dense(), b.to_dense());
    if constraints.is_empty() {
        return (ad, bd);
    }
    // red refinement keeps the corners at indices 0, 1, 2
    debug_assert!(mesh.num_vertices() == n);
    let eliminated: Vec<usize> = constraints
        .iter()
        .map(|c| (3..n).find(|&i| c[i] != 0.0).expect("side has an interior node"))
        .collect();
    let free: Vec<usize> = (0..n).filter(|i| !eliminated.contains(i)).collect();
    let r: Vec<Vec<f64>> = constraints
        .iter()
        .zip(&eliminated)
        .map(|(c, &e)| free.iter().map(|&f| -c[f] / c[e]).collect())
        .collect();
    let reduce = |m: &SymMatrix<f64>| {
        SymMatrix::from_lower(free.len(), |i, j| {
            let (fi, fj) = (free[i], free[j]);
            let mut v = m.get(fi, fj);
            for (s, &es) in eliminated.iter().enumerate() {
                v += r[s][j] * m.get(fi, es) + r[s][i] * m.get(es, fj);
                for (t, &et) in eliminated.iter().enumerate() {
                    v += r[s][i] * r[t][j] * m.get(es, et);
                }
            }
            v
        })
    };
    (reduce(&ad), reduce(&bd))
}

fn sigma_max(b: [[f64; 2]; 2]) -> f64 {
    let [[p, q], [r, s]] = b;
    0.5 * ((p + s).hypot(r - q) + (p - s).hypot(q + r))
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Element constant `κ(T)` for the reference value `kappa`; see
/// [`ScalingRule::AffineSingularValue`].
pub fn element_constant(tri: [Point; 3], kappa: f64) -> f64 {
    let diam = dist(tri[0], tri[1]).max(dist(tri[1], tri[2])).max(dist(tri[2], tri[0]));
    let sigma = (0..3)
        .map(|i| {
            let (o, u, v) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            sigma_max([[u[0] - o[0], v[0] - o[0]], [u[1] - o[1], v[1] - o[1]]])
        })
        .fold(f64::INFINITY, f64::min);
    let affine = kappa * SQRT_2 * sigma;
    let similar = kappa * diam;
    if affine <= similar * (1.0 + 1e-12) {
        similar
    } else {
        affine
    }
}

/// `α = max_T κ(T)` using [`KappaEstimate::scale_value`].
pub fn alpha_for_mesh(m: &TriangleMesh, kappa: &KappaEstimate) -> f64 {
    let k = kappa.scale_value();
    (0..m.num_triangles()).map(|t| element_constant(m.triangle_coords(t), k)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{structured_rectangle, unit_square};

    fn estimate(kappa_ref: f64) -> KappaEstimate {
        KappaEstimate { kappa_ref, refine_depth: 0, mu_min: kappa_ref.powi(-2), scaling: ScalingRule::AffineSingularValue, inflated: false }
    }

    #[test]
    fn depth_too_small() {
        assert_eq!(cr_interpolation_constant(1), Err(FemError::DepthTooSmall(1)));
        assert_eq!(cr_interpolation_constant(0), Err(FemError::DepthTooSmall(0)));
    }

    #[test]
    fn unconstrained_quotient_has_constants() {
        let mu = reference_eigenvalue(REFERENCE_TRIANGLE, 3, false).unwrap();
        assert!(mu.abs() < 1e-10, "{mu}");
    }

    #[test]
    fn congruent_reference_triangles_agree() {
        let base = reference_eigenvalue(REFERENCE_TRIANGLE, 3, true).unwrap();
        let mirrored = reference_eigenvalue([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]], 3, true).unwrap();
        let moved = reference_eigenvalue([[2.0, -1.0], [2.0, 0.0], [1.0, -1.0]], 3, true).unwrap();
        assert!((base - mirrored).abs() < 1e-10 * base);
        assert!((base - moved).abs() < 1e-10 * base);
    }

    #[test]
    fn dense_and_iterative_routes_agree() {
        let d = reference_eigenvalue_via(REFERENCE_TRIANGLE, 4, true, Some(true)).unwrap();
        let i = reference_eigenvalue_via(REFERENCE_TRIANGLE, 4, true, Some(false)).unwrap();
        assert!((d - i).abs() < 1e-9 * d, "{d} {i}");
    }

    #[test]
    fn kappa_increases_and_settles() {
        let k: Vec<f64> = (3..=5).map(|d| cr_interpolation_constant(d).unwrap().kappa_ref).collect();
        assert!(k[0] <= k[1] && k[1] <= k[2], "{k:?}");
        assert!((k[2] - k[1]) / k[2] < 0.01, "{k:?}");
    }

    #[test]
    fn inflation() {
        let k = estimate(0.25);
        assert_eq!(k.inflated().scale_value(), 1.02 * 0.25);
        assert_eq!(k.inflated().inflated().scale_value(), 1.02 * 0.25);
        assert_eq!(k.scale_value(), 0.25);
    }

    #[test]
    fn structured_alpha_is_kappa_times_h() {
        let k = estimate(0.3);
        let m = unit_square(4).unwrap();
        assert_eq!(alpha_for_mesh(&m, &k), 0.3 * (SQRT_2 / 4.0));
        assert_eq!(alpha_for_mesh(&m, &k), 0.3 * m.metrics().h_max);
        assert_eq!(alpha_for_mesh(&m.refine_red(), &k), alpha_for_mesh(&m, &k) / 2.0);
    }

    #[test]
    fn stretched_elements_exceed_diameter_scaling() {
        let equilateral = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]];
        assert!(element_constant(equilateral, 1.0) > 1.0 + 1e-6);
        // 2:1 cells: right triangles that are not isosceles
        let m = structured_rectangle(2, 4, 1.0, 1.0).unwrap();
        assert!(alpha_for_mesh(&m, &estimate(1.0)) > m.metrics().h_max);
    }

    #[test]
    fn mixed_mesh_uses_largest_element() {
        let m = TriangleMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.25, 0.5]],
            vec![[0, 1, 2], [1, 3, 2], [1, 4, 3]],
        )
        .unwrap();
        let alpha = alpha_for_mesh(&m, &estimate(1.0));
        assert_eq!(alpha, SQRT_2);
        let small = element_constant(m.triangle_coords(2), 1.0);
        assert!(small < alpha);
    }
}
