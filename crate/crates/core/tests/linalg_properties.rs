mod common;

use common::{
    bisection_eigenvalues, congruence, gaussian, gaussian_vec, gershgorin, identity, matmul, orthonormal_columns,
    random_spd, random_symmetric, solve_dense, transpose, Dense,
};
use eigbound::linalg::{cholesky, rayleigh, solve_gevp, solve_gevp_semidefinite, LinalgError, SymMatrix};
use proptest::prelude::*;

fn sym(a: &Dense) -> SymMatrix<f64> {
    SymMatrix::from_rows(a).expect("symmetric input")
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0)
}

/// `[a | b]` column-wise.
fn hcat(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standard_problem_matches_inertia_bisection(seed in any::<u64>()) {
        let a = random_symmetric(&mut common::rng(seed), 8);
        let r = gershgorin(&a) + 1.0;
        let oracle = bisection_eigenvalues(&a, &identity(8), -r, r);
        let got = solve_gevp(&sym(&a), &SymMatrix::identity(8), 8).unwrap();
        for (g, o) in got.values.iter().zip(&oracle) {
            prop_assert!(close(*g, *o, 1e-9), "{} vs {}", g, o);
        }
    }

    #[test]
    fn generalized_problem_matches_inertia_bisection(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = common::rng(seed);
        let a = random_symmetric(&mut rng, n);
        let b = random_spd(&mut rng, n, 1.0);
        let got = solve_gevp(&sym(&a), &sym(&b), n).unwrap();
        // every eigenvalue lies within ‖a‖ / λ_min(b) ≤ ‖a‖ / 1
        let r = gershgorin(&a) + 1.0;
        let oracle = bisection_eigenvalues(&a, &b, -r, r);
        for (g, o) in got.values.iter().zip(&oracle) {
            prop_assert!(close(*g, *o, 1e-9), "{} vs {}", g, o);
        }
    }

    #[test]
    fn residual_and_orthonormality_contracts(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = common::rng(seed);
        let a = random_symmetric(&mut rng, n);
        let b = random_spd(&mut rng, n, 0.5);
        let count = 1 + (seed as usize % n);
        let e = solve_gevp(&sym(&a), &sym(&b), count).unwrap();
        prop_assert_eq!(e.len(), count);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.max_residual() <= 1e-9, "{}", e.max_residual());
        prop_assert!(e.b_orth_error <= 1e-8, "{}", e.b_orth_error);
    }

    #[test]
    fn smallest_eigenvalue_minimizes_rayleigh(seed in any::<u64>(), n in 2usize..16) {
        let mut rng = common::rng(seed);
        let a = sym(&random_symmetric(&mut rng, n));
        let b = sym(&random_spd(&mut rng, n, 1.0));
        let e = solve_gevp(&a, &b, n).unwrap();
        let (lo, hi) = (e.values[0], e.values[n - 1]);
        for _ in 0..1000 {
            let x = gaussian_vec(&mut rng, n);
            let r = rayleigh(&a, &b, &x).unwrap();
            prop_assert!(r >= lo - 1e-9 * lo.abs().max(1.0), "{} < {}", r, lo);
            prop_assert!(r <= hi + 1e-9 * hi.abs().max(1.0));
        }
    }

    #[test]
    fn restriction_to_nested_subspaces_raises_eigenvalues(seed in any::<u64>(), n in 4usize..14) {
        let mut rng = common::rng(seed);
        let a = random_symmetric(&mut rng, n);
        let b = random_spd(&mut rng, n, 1.0);
        let t_dim = 2 + seed as usize % (n - 2);
        let s_dim = 1 + seed as usize % (t_dim - 1).max(1);
        let t_basis = gaussian(&mut rng, n, t_dim);
        // S spans the first s_dim directions of T
        let s_basis: Dense = t_basis.iter().map(|r| r[..s_dim].to_vec()).collect();
        let full = solve_gevp(&sym(&a), &sym(&b), n).unwrap().values;
        let on_t = solve_gevp(&sym(&congruence(&a, &t_basis)), &sym(&congruence(&b, &t_basis)), t_dim).unwrap().values;
        let on_s = solve_gevp(&sym(&congruence(&a, &s_basis)), &sym(&congruence(&b, &s_basis)), s_dim).unwrap().values;
        for k in 0..s_dim {
            prop_assert!(on_s[k] >= on_t[k] - 1e-9 * on_t[k].abs().max(1.0), "k={} S {} < T {}", k, on_s[k], on_t[k]);
        }
        for k in 0..t_dim {
            prop_assert!(on_t[k] >= full[k] - 1e-9 * full[k].abs().max(1.0), "k={} T {} < X {}", k, on_t[k], full[k]);
        }
    }

    #[test]
    fn rank_four_semidefinite_matches_range_reduction(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = random_spd(&mut rng, 6, 1.0);
        let h = gaussian(&mut rng, 4, 6);
        let b = matmul(&transpose(&h), &h);
        let got = solve_gevp_semidefinite(&sym(&a), &sym(&b)).unwrap();
        prop_assert_eq!(got.len(), 4);

        // range(b) = range(Hᵀ); the finite eigenvalues live on the a-orthogonal
        // complement of ker(b), spanned by Q − Z·(ZᵀaZ)⁻¹·ZᵀaQ
        let q = orthonormal_columns(&transpose(&h), 1e-10);
        let qz = orthonormal_columns(&hcat(&q, &identity(6)), 1e-8);
        let z: Dense = qz.iter().map(|r| r[4..].to_vec()).collect();
        prop_assert_eq!(z[0].len(), 2);
        let az = matmul(&a, &z);
        let correction = matmul(&z, &solve_dense(&congruence(&a, &z), &matmul(&transpose(&az), &q)));
        let y: Dense = q.iter().zip(&correction).map(|(r, c)| r.iter().zip(c).map(|(x, d)| x - d).collect()).collect();
        let (ar, br) = (congruence(&a, &y), congruence(&b, &y));
        let oracle = bisection_eigenvalues(&ar, &br, 0.0, 1e8);
        for (g, o) in got.values.iter().zip(&oracle) {
            prop_assert!(close(*g, *o, 1e-9), "{} vs {}", g, o);
        }
    }

    #[test]
    fn rayleigh_is_scale_invariant(seed in any::<u64>(), c in -1e3f64..1e3, e in -20i32..20) {
        prop_assume!(c.abs() > 1e-3);
        let mut rng = common::rng(seed);
        let a = sym(&random_symmetric(&mut rng, 5));
        let b = sym(&random_spd(&mut rng, 5, 1.0));
        let x = gaussian_vec(&mut rng, 5);
        let r = rayleigh(&a, &b, &x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!(close(rayleigh(&a, &b, &scaled).unwrap(), r, 1e-13));
        let pow2: Vec<f64> = x.iter().map(|v| v * 2f64.powi(e)).collect();
        prop_assert_eq!(rayleigh(&a, &b, &pow2).unwrap(), r);
    }

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), n in 1usize..25) {
        let a = random_spd(&mut common::rng(seed), n, 0.1);
        let l = cholesky(&sym(&a)).unwrap().into_factor();
        let ld: Dense = (0..n).map(|i| (0..n).map(|j| l[(i, j)]).collect()).collect();
        let rec = matmul(&ld, &transpose(&ld));
        let err: f64 = rec.iter().flatten().zip(a.iter().flatten()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * norm, "{}", err / norm);
    }
}

#[test]
fn zero_vector_has_no_rayleigh_quotient() {
    let a = SymMatrix::from_diag(&[1.0, 4.0]);
    assert_eq!(rayleigh(&a, &SymMatrix::identity(2), &[0.0, 0.0]), Err(LinalgError::ZeroDenominator));
}

#[test]
fn zero_right_form_is_rank_zero() {
    let a = SymMatrix::<f64>::identity(3);
    assert!(matches!(solve_gevp_semidefinite(&a, &SymMatrix::zeros(3)), Err(LinalgError::RankZero)));
}
