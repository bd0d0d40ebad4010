//! Finite element discretization of the Dirichlet Laplacian on triangle
//! meshes: conforming P1 and Crouzeix–Raviart elements, plus the CR
//! interpolation constant used to scale lower bounds.

mod kappa;

pub use kappa::{
    alpha_for_mesh, cr_interpolation_constant, element_constant, reference_eigenvalue, KappaEstimate, ScalingRule,
    DEFAULT_KAPPA_DEPTH, KAPPA_INFLATION, REFERENCE_TRIANGLE,
};

use std::fmt;

use thiserror::Error;

use crate::linalg::{solve_sparse_gevp, EigenOptions, EigenResult, LinalgError, SparseSymMatrix, SymTripletBuilder};
use crate::mesh::{MeshError, TriangleMesh};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("mesh has no interior degrees of freedom for the {0} element")]
    NoInteriorDofs(ElementKind),
    #[error("degenerate triangle (signed area {0:e})")]
    DegenerateTriangle(f64),
    #[error("refine depth {0} is too small (need at least 2)")]
    DepthTooSmall(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    P1Conforming,
    CrNonconforming,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::P1Conforming => "P1",
            ElementKind::CrNonconforming => "CR",
        })
    }
}

/// Free degrees of freedom: interior vertices (P1) or interior edges (CR),
/// numbered in increasing vertex/edge index. Boundary dofs map to `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    kind: ElementKind,
    n_global: usize,
    local: Vec<[Option<usize>; 3]>,
    /// Global id of each mesh entity (vertex or edge).
    entity_dof: Vec<Option<usize>>,
}

impl DofMap {
    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn n_global(&self) -> usize {
        self.n_global
    }

    pub fn local(&self, t: usize) -> [Option<usize>; 3] {
        self.local[t]
    }

    pub fn entity_dof(&self) -> &[Option<usize>] {
        &self.entity_dof
    }
}

/// Mesh entity carrying local basis function `i` of triangle `t`.
fn local_entities(m: &TriangleMesh, kind: ElementKind, t: usize) -> [usize; 3] {
    match kind {
        ElementKind::P1Conforming => m.triangles()[t],
        ElementKind::CrNonconforming => m.triangle_edges()[t],
    }
}

pub fn build_dof_map(m: &TriangleMesh, kind: ElementKind) -> Result<DofMap, FemError> {
    let on_boundary = match kind {
        ElementKind::P1Conforming => m.boundary_vertices(),
        ElementKind::CrNonconforming => m.boundary_edges().to_vec(),
    };
    let mut next = 0;
    let entity_dof: Vec<Option<usize>> = on_boundary
        .iter()
        .map(|&b| {
            (!b).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    if next == 0 {
        return Err(FemError::NoInteriorDofs(kind));
    }
    let local = (0..m.num_triangles())
        .map(|t| local_entities(m, kind, t).map(|e| entity_dof[e]))
        .collect();
    Ok(DofMap { kind, n_global: next, local, entity_dof })
}

/// Exact element stiffness and mass matrices on the triangle `tri`
/// (counterclockwise). P1 uses the barycentric basis; CR uses
/// `φ_i = 1 − 2λ_i`, the function equal to one at the midpoint of the edge
/// opposite vertex `i`.
pub fn local_matrices<T: Scalar>(tri: [[T; 2]; 3], kind: ElementKind) -> Result<([[T; 3]; 3], [[T; 3]; 3]), FemError> {
    let two = T::lit(2.0);
    let det = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
    let area = det / two;
    if !(area > T::zero()) || !area.is_finite() {
        return Err(FemError::DegenerateTriangle(area.to_f64_lossy()));
    }
    // 2·area·∇λ_i
    let d: [[T; 2]; 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [tri[j][1] - tri[k][1], tri[k][0] - tri[j][0]]
    });
    let scale = match kind {
        ElementKind::P1Conforming => T::one() / (T::lit(4.0) * area),
        ElementKind::CrNonconforming => T::one() / area,
    };
    let stiffness = std::array::from_fn(|i| std::array::from_fn(|j| (d[i][0] * d[j][0] + d[i][1] * d[j][1]) * scale));
    let mass = match kind {
        ElementKind::P1Conforming => {
            let m = area / T::lit(12.0);
            std::array::from_fn(|i| std::array::from_fn(|j| if i == j { m * two } else { m }))
        }
        ElementKind::CrNonconforming => {
            let m = area / T::lit(3.0);
            std::array::from_fn(|i| std::array::from_fn(|j| if i == j { m } else { T::zero() }))
        }
    };
    Ok((stiffness, mass))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssembledPair {
    pub stiffness: SparseSymMatrix<f64>,
    pub mass: SparseSymMatrix<f64>,
    pub dof_map: DofMap,
}

fn assemble_with(
    m: &TriangleMesh,
    kind: ElementKind,
    order: usize,
    global: impl Fn(usize) -> [Option<usize>; 3],
) -> Result<(SparseSymMatrix<f64>, SparseSymMatrix<f64>), FemError> {
    let mut k = SymTripletBuilder::new(order);
    let mut mm = SymTripletBuilder::new(order);
    for t in 0..m.num_triangles() {
        let (kl, ml) = local_matrices(m.triangle_coords(t), kind)?;
        let g = global(t);
        for i in 0..3 {
            let Some(gi) = g[i] else { continue };
            for j in i..3 {
                let Some(gj) = g[j] else { continue };
                k.add(gi, gj, kl[i][j]);
                if ml[i][j] != 0.0 || i == j {
                    mm.add(gi, gj, ml[i][j]);
                }
            }
        }
    }
    Ok((k.build(), mm.build()))
}

/// Global stiffness and mass on the free dofs (homogeneous Dirichlet
/// conditions by elimination).
pub fn assemble(m: &TriangleMesh, kind: ElementKind) -> Result<AssembledPair, FemError> {
    let dof_map = build_dof_map(m, kind)?;
    let (stiffness, mass) = assemble_with(m, kind, dof_map.n_global, |t| dof_map.local[t])?;
    Ok(AssembledPair { stiffness, mass, dof_map })
}

/// Stiffness and mass over every vertex (P1) or edge (CR), boundary
/// included.
pub fn assemble_unconstrained(
    m: &TriangleMesh,
    kind: ElementKind,
) -> Result<(SparseSymMatrix<f64>, SparseSymMatrix<f64>), FemError> {
    let order = match kind {
        ElementKind::P1Conforming => m.num_vertices(),
        ElementKind::CrNonconforming => m.num_edges(),
    };
    assemble_with(m, kind, order, |t| local_entities(m, kind, t).map(Some))
}

/// The `count` smallest discrete Dirichlet eigenpairs.
pub fn solve_discrete_eigen(m: &TriangleMesh, kind: ElementKind, count: usize) -> Result<EigenResult<f64>, FemError> {
    solve_discrete_eigen_with(m, kind, count, &EigenOptions::default())
}

pub fn solve_discrete_eigen_with(
    m: &TriangleMesh,
    kind: ElementKind,
    count: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<f64>, FemError> {
    let pair = assemble(m, kind)?;
    Ok(solve_sparse_gevp(&pair.stiffness, &pair.mass, count, opts)?)
}
