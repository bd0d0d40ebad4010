//! Two-sided eigenvalue enclosures for the Dirichlet Laplacian: lower bounds
//! from Crouzeix–Raviart eigenvalues, upper bounds from P1.

mod format;

pub use format::{format_sig, format_sig_digits, row_fields, write_csv, write_markdown, Rounding, CSV_HEADER, SIGNIFICANT_DIGITS};

use std::f64::consts::PI;
use std::path::PathBuf;

use thiserror::Error;

use crate::fem::{
    alpha_for_mesh, cr_interpolation_constant, solve_discrete_eigen_with, ElementKind, FemError, KappaEstimate,
    DEFAULT_KAPPA_DEPTH,
};
use crate::framework::{lower_bound_transform, FrameworkError};
use crate::linalg::EigenOptions;
use crate::mesh::{load_mesh, unit_square, MeshError, TriangleMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("alpha must be positive, got {0} (zero requires an explicit override)")]
    AlphaNonpositive(f64),
    #[error("at least one refinement level is required")]
    NoLevels,
    #[error("at least one eigenvalue must be requested")]
    NoEigenvalues,
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaMode {
    /// CR interpolation constant at the default depth, inflated.
    Auto,
    /// Like `Auto`, with a precomputed constant (inflation is still applied).
    AutoWith(KappaEstimate),
    /// User-supplied α. Zero is accepted only with `allow_zero`, since it
    /// claims the lower space is contained in the energy space.
    Fixed { alpha: f64, allow_zero: bool },
}

impl AlphaMode {
    pub fn fixed(alpha: f64) -> Self {
        AlphaMode::Fixed { alpha, allow_zero: false }
    }

    fn validate(&self) -> Result<(), BoundsError> {
        if let AlphaMode::Fixed { alpha, allow_zero } = *self {
            let ok = alpha.is_finite() && (alpha > 0.0 || (alpha == 0.0 && allow_zero));
            if !ok {
                return Err(BoundsError::AlphaNonpositive(alpha));
            }
        }
        Ok(())
    }

    /// Replaces `Auto` by `AutoWith` so the constant is computed once.
    pub fn resolve(&self) -> Result<Self, BoundsError> {
        self.validate()?;
        Ok(match self {
            AlphaMode::Auto => AlphaMode::AutoWith(cr_interpolation_constant(DEFAULT_KAPPA_DEPTH)?),
            other => *other,
        })
    }

    fn alpha_for(&self, m: &TriangleMesh) -> Result<f64, BoundsError> {
        Ok(match self.resolve()? {
            AlphaMode::AutoWith(k) => alpha_for_mesh(m, &k.inflated()),
            AlphaMode::Fixed { alpha, .. } => alpha,
            AlphaMode::Auto => unreachable!("resolved above"),
        })
    }
}

/// One eigenvalue index on one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct EnclosureRow {
    pub level: usize,
    pub h_max: f64,
    /// 1-based eigenvalue index.
    pub k: usize,
    /// Eigenvalue of the lower space (CR unless configured otherwise).
    pub lambda_cr: f64,
    pub alpha: f64,
    pub lower: f64,
    /// P1 eigenvalue.
    pub upper: f64,
    pub exact: Option<f64>,
    pub width: f64,
}

impl EnclosureRow {
    /// `None` when no exact value is known.
    pub fn contains_exact(&self) -> Option<bool> {
        self.exact.map(|e| self.lower <= e && e <= self.upper)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncloseOptions {
    pub alpha: AlphaMode,
    /// Space whose eigenvalues are transformed into lower bounds.
    pub lower_space: ElementKind,
    /// Seed for the eigensolver start vectors.
    pub seed: u64,
}

impl Default for EncloseOptions {
    fn default() -> Self {
        Self { alpha: AlphaMode::Auto, lower_space: ElementKind::CrNonconforming, seed: 0 }
    }
}

/// Enclosures for the `count` smallest eigenvalues on `m`. Rows carry level 0.
pub fn enclose(m: &TriangleMesh, count: usize, opts: &EncloseOptions) -> Result<Vec<EnclosureRow>, BoundsError> {
    if count == 0 {
        return Err(BoundsError::NoEigenvalues);
    }
    let alpha = opts.alpha.alpha_for(m)?;
    let eig = EigenOptions { seed: opts.seed };
    let lower_space = solve_discrete_eigen_with(m, opts.lower_space, count, &eig)?;
    let upper_space = solve_discrete_eigen_with(m, ElementKind::P1Conforming, count, &eig)?;
    let exact = registered_exact_values(m, count);
    let h_max = m.metrics().h_max;
    (0..count)
        .map(|i| {
            let lambda_cr = lower_space.values[i];
            let lower = lower_bound_transform(lambda_cr, alpha)?;
            let upper = upper_space.values[i];
            Ok(EnclosureRow {
                level: 0,
                h_max,
                k: i + 1,
                lambda_cr,
                alpha,
                lower,
                upper,
                exact: exact.as_ref().map(|e| e[i]),
                width: upper - lower,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Unit square with an `n × n` structured mesh.
    Square(usize),
    MeshFile(PathBuf),
    Mesh(TriangleMesh),
}

impl Domain {
    pub fn coarse_mesh(&self) -> Result<TriangleMesh, BoundsError> {
        Ok(match self {
            Domain::Square(n) => unit_square(*n)?,
            Domain::MeshFile(path) => load_mesh(path)?.mesh,
            Domain::Mesh(m) => m.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// Sorted by `(level, k)`.
    pub rows: Vec<EnclosureRow>,
    /// `observed_rates[k − 1][ℓ] = log2(width_ℓ / width_{ℓ+1})`.
    pub observed_rates: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn levels(&self) -> usize {
        self.rows.iter().map(|r| r.level + 1).max().unwrap_or(0)
    }

    pub fn count(&self) -> usize {
        self.observed_rates.len()
    }

    pub fn row(&self, level: usize, k: usize) -> Option<&EnclosureRow> {
        self.rows.iter().find(|r| r.level == level && r.k == k)
    }

    /// Rows whose exact value lies outside `[lower, upper]`.
    pub fn violations(&self) -> Vec<&EnclosureRow> {
        self.rows.iter().filter(|r| r.contains_exact() == Some(false)).collect()
    }
}

/// Runs [`enclose`] on `levels` meshes, each the red refinement of the
/// previous one.
pub fn convergence_study(
    domain: &Domain,
    levels: usize,
    count: usize,
    opts: &EncloseOptions,
) -> Result<ConvergenceTable, BoundsError> {
    if levels == 0 {
        return Err(BoundsError::NoLevels);
    }
    let opts = EncloseOptions { alpha: opts.alpha.resolve()?, ..*opts };
    let mut mesh = domain.coarse_mesh()?;
    let mut rows = Vec::with_capacity(levels * count);
    for level in 0..levels {
        if level > 0 {
            mesh = mesh.refine_red();
        }
        rows.extend(enclose(&mesh, count, &opts)?.into_iter().map(|r| EnclosureRow { level, ..r }));
    }
    let observed_rates = (0..count)
        .map(|i| {
            (0..levels - 1)
                .map(|l| (rows[l * count + i].width / rows[(l + 1) * count + i].width).log2())
                .collect()
        })
        .collect();
    Ok(ConvergenceTable { rows, observed_rates })
}

/// The `count` smallest Dirichlet eigenvalues `π²(m² + n²)` of the unit
/// square, with multiplicity.
pub fn exact_square_eigenvalues(count: usize) -> Vec<f64> {
    let mut sums: Vec<u64> = (1..=count as u64).flat_map(|m| (1..=count as u64).map(move |n| m * m + n * n)).collect();
    sums.sort_unstable();
    sums.truncate(count);
    sums.into_iter().map(|s| PI * PI * s as f64).collect()
}

/// The `count` smallest Dirichlet eigenvalues `π²(m²/a² + n²/b²)` of an
/// `a × b` rectangle.
pub fn exact_rectangle_eigenvalues(a: f64, b: f64, count: usize) -> Vec<f64> {
    if a == b {
        return exact_square_eigenvalues(count).into_iter().map(|v| v / (a * a)).collect();
    }
    let mut values: Vec<f64> = (1..=count)
        .flat_map(|m| (1..=count).map(move |n| PI * PI * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b))))
        .collect();
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    values
}

/// Side lengths when `m` triangulates an axis-aligned rectangle.
pub fn detect_rectangle(m: &TriangleMesh) -> Option<(f64, f64)> {
    let (lo, hi) = m.bounding_box();
    let (a, b) = (hi[0] - lo[0], hi[1] - lo[1]);
    let scale = a.max(b);
    let on_box = |p: [f64; 2]| {
        (p[0] - lo[0]).abs() <= 1e-12 * scale
            || (p[0] - hi[0]).abs() <= 1e-12 * scale
            || (p[1] - lo[1]).abs() <= 1e-12 * scale
            || (p[1] - hi[1]).abs() <= 1e-12 * scale
    };
    let boundary_on_box = m.edges().iter().zip(m.boundary_edges()).filter(|(_, &b)| b).all(|(&[p, q], _)| {
        let (vp, vq) = (m.vertices()[p], m.vertices()[q]);
        on_box(vp) && on_box(vq) && on_box([0.5 * (vp[0] + vq[0]), 0.5 * (vp[1] + vq[1])])
    });
    let area_matches = (m.total_area() - a * b).abs() <= 1e-12 * a * b;
    (boundary_on_box && area_matches).then_some((a, b))
}

fn registered_exact_values(m: &TriangleMesh, count: usize) -> Option<Vec<f64>> {
    detect_rectangle(m).map(|(a, b)| exact_rectangle_eigenvalues(a, b, count))
}
