use crate::linalg::{
    cholesky, orthonormal_complement, pair_diagnostics, solve_gevp_semidefinite, sym_eigen, EigenResult, LinalgError,
    Matrix, PivotedQr, SymMatrix, Which,
};
use crate::scalar::Scalar;

use super::triple::{HilbertTriple, Subspace};
use super::{holds_geq, FrameworkError, INEQUALITY_SLACK};

/// `P = V·(VᵀMV)⁻¹·VᵀM`, the `M`-orthogonal projector of `X` onto `V`.
pub fn m_projector<T: Scalar>(t: &HilbertTriple<T>) -> Result<Matrix<T>, FrameworkError> {
    // P = U·(M·U)ᵀ for an M-orthonormal basis U of V
    let u = m_orthonormal_span(t.gram_m(), t.basis_v()).map_err(|_| FrameworkError::SingularGram)?;
    let mu = t.gram_m().as_matrix().matmul(&u);
    Ok(u.matmul(&mu.transpose()))
}

/// `M`-orthonormal basis of `{x : Sᵀ·M·x = 0}`; for an empty `s` this is an
/// `M`-orthonormal basis of all of `X`.
pub fn m_orthonormal_complement<T: Scalar>(gram_m: &SymMatrix<T>, s: &Matrix<T>) -> Result<Matrix<T>, FrameworkError> {
    let n = gram_m.order();
    let euclid = if s.cols() == 0 { Matrix::identity(n) } else { orthonormal_complement(&gram_m.as_matrix().matmul(s)) };
    Ok(m_orthonormalize(gram_m, euclid)?)
}

/// `M`-orthonormal basis of `range(s)` for `s` of full column rank.
pub fn m_orthonormal_span<T: Scalar>(gram_m: &SymMatrix<T>, s: &Matrix<T>) -> Result<Matrix<T>, FrameworkError> {
    Ok(m_orthonormalize(gram_m, PivotedQr::new(s).q_thin(s.cols()))?)
}

/// `Q·L⁻ᵀ` where `QᵀMQ = L·Lᵀ`.
fn m_orthonormalize<T: Scalar>(gram_m: &SymMatrix<T>, euclid: Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let n = gram_m.order();
    if euclid.cols() == 0 {
        return Ok(euclid);
    }
    let c = gram_m.congruence(&euclid);
    let chol = cholesky(&c)?;
    // Y = Q·L⁻ᵀ, row by row: L·yᵣᵀ = qᵣᵀ
    let mut y = euclid;
    for r in 0..n {
        let mut row = y.row(r).to_vec();
        chol.solve_lower_in_place(&mut row);
        y.row_mut(r).copy_from_slice(&row);
    }
    Ok(y)
}

/// Optimal constant in `‖x − Px‖_N ≤ α·‖x − Px‖_M`.
#[derive(Clone, Debug)]
pub struct AlphaEstimate<T> {
    pub alpha: T,
    /// A vector of `range(I − P)` attaining the supremum (zero when the
    /// complement is trivial).
    pub maximizer: Vec<T>,
    pub complement_dim: usize,
}

/// `α² = max { ‖w‖²_N / ‖w‖²_M : w ∈ range(I − P) }`, computed as the largest
/// eigenvalue of `N` on an `M`-orthonormal basis of the complement. When
/// `V = X` the complement is trivial and `α = 0`.
pub fn exact_alpha<T: Scalar>(t: &HilbertTriple<T>) -> Result<AlphaEstimate<T>, FrameworkError> {
    let n = t.dim_x();
    if t.dim_v() >= n {
        return Ok(AlphaEstimate { alpha: T::zero(), maximizer: vec![T::zero(); n], complement_dim: 0 });
    }
    let y = m_orthonormal_complement(t.gram_m(), t.basis_v())?;
    let k = t.gram_n().congruence(&y);
    let top = sym_eigen(&k, Which::Largest(1), 0)?;
    let alpha = top.values[0].max(T::zero()).sqrt();
    let maximizer = y.mul_vec(&top.vectors.column(0));
    Ok(AlphaEstimate { alpha, maximizer, complement_dim: y.cols() })
}

/// Finite eigenpairs of `M(u, v) = λ·N(u, v)` on `W` or `V`, ascending, in
/// coordinates of the subspace basis. `ker(N)` is deflated.
pub fn subspace_eigenvalues<T: Scalar>(
    t: &HilbertTriple<T>,
    which: Subspace,
    count: usize,
) -> Result<EigenResult<T>, FrameworkError> {
    let all = all_subspace_eigenpairs(t, which)?;
    if count > all.len() {
        return Err(LinalgError::CountExceedsOrder { count, order: all.len() }.into());
    }
    Ok(all.truncated(count))
}

/// Every finite eigenpair on a subspace. The pencil is formed on an
/// `M`-orthonormal basis of the span, so the conditioning of the stored
/// basis does not enter; vectors are mapped back to its coordinates.
fn all_subspace_eigenpairs<T: Scalar>(t: &HilbertTriple<T>, which: Subspace) -> Result<EigenResult<T>, LinalgError> {
    let s = t.basis(which);
    let y = m_orthonormalize(t.gram_m(), PivotedQr::new(s).q_thin(s.cols()))?;
    let eig = solve_gevp_semidefinite(&t.gram_m().congruence(&y), &t.gram_n().congruence(&y))?;
    let qr = PivotedQr::new(s);
    let mut vectors = Matrix::zeros(s.cols(), eig.len());
    for j in 0..eig.len() {
        vectors.set_column(j, &qr.solve_least_squares(&y.mul_vec(&eig.vector(j))));
    }
    let (residuals, b_orth_error) =
        pair_diagnostics(&t.gram_m().congruence(s), &t.gram_n().congruence(s), &eig.values, &vectors);
    Ok(EigenResult { values: eig.values, vectors, residuals, b_orth_error })
}

/// `λ / (1 + α²·λ)`.
pub fn lower_bound_transform<T: Scalar>(lambda_v: T, alpha: T) -> Result<T, FrameworkError> {
    if !(lambda_v > T::zero()) {
        return Err(FrameworkError::NonpositiveEigenvalue(lambda_v.to_f64_lossy()));
    }
    if !(alpha >= T::zero()) {
        return Err(FrameworkError::NegativeAlpha(alpha.to_f64_lossy()));
    }
    Ok(lambda_v / (T::one() + alpha * alpha * lambda_v))
}

#[derive(Clone, Debug)]
pub struct TheoremReport<T> {
    pub k_max: usize,
    pub lambdas_w: Vec<T>,
    pub lambdas_v: Vec<T>,
    pub alpha: T,
    pub lower_bounds: Vec<T>,
    pub all_hold: bool,
    /// `min_k (λ_k(W) − lower_k)`.
    pub worst_margin: T,
}

/// Computes both sides of `λ_k(V) / (1 + α²λ_k(V)) ≤ λ_k(W)` for `k ≤ k_max`
/// with the optimal `α`.
pub fn verify_theorem<T: Scalar>(t: &HilbertTriple<T>, k_max: usize) -> Result<TheoremReport<T>, FrameworkError> {
    let lambdas_w = subspace_eigenvalues(t, Subspace::W, k_max)?.values;
    let lambdas_v = subspace_eigenvalues(t, Subspace::V, k_max)?.values;
    let alpha = exact_alpha(t)?.alpha;
    let lower_bounds =
        lambdas_v.iter().map(|&l| lower_bound_transform(l, alpha)).collect::<Result<Vec<T>, FrameworkError>>()?;
    let mut all_hold = true;
    let mut worst_margin = T::infinity();
    for (&lw, &lb) in lambdas_w.iter().zip(&lower_bounds) {
        let tol = T::lit(INEQUALITY_SLACK) * lw.abs().max(T::one());
        all_hold &= lb <= lw + tol;
        worst_margin = worst_margin.min(lw - lb);
    }
    Ok(TheoremReport { k_max, lambdas_w, lambdas_v, alpha, lower_bounds, all_hold, worst_margin })
}

/// One inequality `lhs ≥ rhs` of the proof chain.
#[derive(Clone, Debug)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ChainLink {
    fn geq(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { name, lhs, rhs, holds: holds_geq(lhs, rhs) }
    }
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub k: usize,
    pub lambda_w: f64,
    pub lambda_x: f64,
    /// Minimum of the Rayleigh quotient over the `M`-orthogonal complement in
    /// `X` of the first `k − 1` eigenvectors of `V`.
    pub min_rayleigh_complement: f64,
    pub lower_bound: f64,
    pub alpha: f64,
    /// `λ_k(W) ≥ λ_k ≥ min R ≥ lower`, then the energy estimates at the
    /// minimizer `v`: `R(v) ≥ lower`, `λ_k(V)·‖Pv‖²_N ≤ ‖Pv‖²_M`,
    /// `α²·‖v − Pv‖²_M ≥ ‖v − Pv‖²_N`.
    pub links: Vec<ChainLink>,
    pub dim_complement_x: usize,
    pub dim_complement_in_v: usize,
    pub dim_v_complement_x: usize,
    /// Largest normalized `M`-inner product between the two parts of the
    /// splitting, and between either part and the first `k − 1` vectors.
    pub splitting_orthogonality: f64,
    /// `|‖v‖²_M − ‖Pv‖²_M − ‖v − Pv‖²_M| / ‖v‖²_M` at the minimizer.
    pub pythagoras_defect: f64,
    /// `2·N(Pv, v − Pv) / N(v, v)` at the minimizer. Not controlled by the
    /// hypotheses; reported for inspection only.
    pub n_cross_term: f64,
    pub all_hold: bool,
}

const SPLITTING_TOL: f64 = 1e-10;

fn nth_or_inf<T: Scalar>(r: Result<EigenResult<T>, LinalgError>, k: usize) -> Result<f64, FrameworkError> {
    match r {
        Ok(e) if e.len() >= k => Ok(e.values[k - 1].to_f64_lossy()),
        Ok(_) | Err(LinalgError::RankZero) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

fn normalized_m_inner<T: Scalar>(gram_m: &SymMatrix<T>, a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    let mut worst = 0.0f64;
    let ma = gram_m.as_matrix().matmul(a);
    for i in 0..a.cols() {
        let ai = a.column(i);
        let nai = gram_m.bilinear(&ai, &ai).sqrt();
        let mai = ma.column(i);
        for j in 0..b.cols() {
            let bj = b.column(j);
            let nbj = gram_m.bilinear(&bj, &bj).sqrt();
            let ip = crate::linalg::dot(&mai, &bj);
            worst = worst.max((ip / (nai * nbj)).abs().to_f64_lossy());
        }
    }
    worst
}

/// Recomputes every link of the max-min argument for index `k`.
pub fn verify_maxmin_chain<T: Scalar>(t: &HilbertTriple<T>, k: usize) -> Result<ChainReport, FrameworkError> {
    let n = t.dim_x();
    let gm = t.gram_m();
    let gn = t.gram_n();
    if k == 0 {
        return Err(FrameworkError::InvalidDims("k starts at 1".into()));
    }
    let v_eig = subspace_eigenvalues(t, Subspace::V, k)?;
    let lambda_v = v_eig.values[k - 1];
    let basis_v = t.basis_v();
    // first k − 1 eigenvectors of V, in X coordinates
    let v_first = basis_v.matmul(&v_eig.vectors.select_columns(&(0..k - 1).collect::<Vec<_>>()));

    let lambda_w = nth_or_inf(all_subspace_eigenpairs(t, Subspace::W), k)?;
    let lambda_x = nth_or_inf(solve_gevp_semidefinite(gm, gn), k)?;

    let complement = m_orthonormal_complement(gm, &v_first)?;
    let reduced_n = gn.congruence(&complement);
    let reduced_m = gm.congruence(&complement);
    let (min_r, minimizer) = match solve_gevp_semidefinite(&reduced_m, &reduced_n) {
        Ok(e) => (e.values[0].to_f64_lossy(), Some(complement.mul_vec(&e.vector(0)))),
        Err(LinalgError::RankZero) => (f64::INFINITY, None),
        Err(e) => return Err(e.into()),
    };

    let alpha = exact_alpha(t)?.alpha;
    let lower = lower_bound_transform(lambda_v, alpha)?.to_f64_lossy();
    let (lambda_vf, alphaf) = (lambda_v.to_f64_lossy(), alpha.to_f64_lossy());

    let mut links = vec![
        ChainLink::geq("lambda_k(W) >= lambda_k(X)", lambda_w, lambda_x),
        ChainLink::geq("lambda_k(X) >= min R on complement", lambda_x, min_r),
        ChainLink::geq("min R on complement >= lower bound", min_r, lower),
    ];

    // splitting V_{k-1}^{X⊥} = V_{k-1}^{V⊥} ⊕ V^{X⊥}
    let in_v = {
        let coords = if k > 1 {
            orthonormal_complement(&basis_v.tr_matmul(&gm.as_matrix().matmul(&v_first)))
        } else {
            Matrix::identity(basis_v.cols())
        };
        basis_v.matmul(&coords)
    };
    let v_perp = m_orthonormal_complement(gm, basis_v)?;
    let mut splitting_orthogonality = normalized_m_inner(gm, &in_v, &v_perp);
    if k > 1 {
        splitting_orthogonality = splitting_orthogonality
            .max(normalized_m_inner(gm, &v_first, &in_v))
            .max(normalized_m_inner(gm, &v_first, &v_perp));
    }
    let dims_ok = complement.cols() == in_v.cols() + v_perp.cols() && complement.cols() == n + 1 - k;

    let (mut pythagoras_defect, mut n_cross_term) = (0.0, 0.0);
    if let Some(v) = minimizer {
        let p = m_projector(t)?;
        let pv = p.mul_vec(&v);
        let rest: Vec<T> = v.iter().zip(&pv).map(|(&a, &b)| a - b).collect();
        let (vm, vn) = t.norms_sq(&v);
        let (pm, pn) = t.norms_sq(&pv);
        let (rm, rn) = t.norms_sq(&rest);
        let (vm, vn, pm, pn, rm, rn) =
            (vm.to_f64_lossy(), vn.to_f64_lossy(), pm.to_f64_lossy(), pn.to_f64_lossy(), rm.to_f64_lossy(), rn.to_f64_lossy());
        pythagoras_defect = ((vm - pm - rm) / vm).abs();
        n_cross_term = (vn - pn - rn) / vn;
        links.push(ChainLink::geq("R(v) >= lower bound at minimizer", vm / vn, lower));
        links.push(ChainLink::geq("||Pv||_M^2 >= lambda_k(V) ||Pv||_N^2", pm, lambda_vf * pn));
        links.push(ChainLink::geq("alpha^2 ||v-Pv||_M^2 >= ||v-Pv||_N^2", alphaf * alphaf * rm, rn));
    }

    let all_hold = links.iter().all(|l| l.holds)
        && dims_ok
        && splitting_orthogonality < SPLITTING_TOL
        && pythagoras_defect < SPLITTING_TOL;
    Ok(ChainReport {
        k,
        lambda_w,
        lambda_x,
        min_rayleigh_complement: min_r,
        lower_bound: lower,
        alpha: alphaf,
        links,
        dim_complement_x: complement.cols(),
        dim_complement_in_v: in_v.cols(),
        dim_v_complement_x: v_perp.cols(),
        splitting_orthogonality,
        pythagoras_defect,
        n_cross_term,
        all_hold,
    })
}
