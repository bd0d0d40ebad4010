//! Conforming triangulations of polygonal domains in the plane.

mod io;

pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh, LoadedMesh};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh invariant violated ({invariant}): {detail}")]
    InvariantViolation { invariant: &'static str, detail: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn violation(invariant: &'static str, detail: impl Into<String>) -> MeshError {
    MeshError::InvariantViolation { invariant, detail: detail.into() }
}

pub type Point = [f64; 2];

/// Triangulation with derived edge topology.
///
/// `triangle_edges[t][i]` is the edge opposite local vertex `i` of triangle
/// `t`. Edges are sorted vertex pairs in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_edge: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshMetrics {
    pub h_max: f64,
    pub h_min: f64,
    /// Smallest interior angle, degrees.
    pub min_angle: f64,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

impl TriangleMesh {
    /// Builds the edge table and validates every invariant. Triangles must be
    /// counterclockwise.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= nv) {
                return Err(violation("vertex index", format!("triangle {t} references vertex {bad} of {nv}")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(violation("positive area", format!("triangle {t} repeats a vertex")));
            }
        }
        let mut edge_map: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for tri in &triangles {
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                edge_map.entry([a.min(b), a.max(b)]).or_insert(0);
            }
        }
        let edges: Vec<[usize; 2]> = edge_map.keys().copied().collect();
        for (idx, slot) in edge_map.values_mut().enumerate() {
            *slot = idx;
        }
        let mut share = vec![0usize; edges.len()];
        let triangle_edges: Vec<[usize; 3]> = triangles
            .iter()
            .map(|tri| {
                let mut te = [0; 3];
                for (i, slot) in te.iter_mut().enumerate() {
                    let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                    *slot = edge_map[&[a.min(b), a.max(b)]];
                    share[*slot] += 1;
                }
                te
            })
            .collect();
        let boundary_edge = share.iter().map(|&s| s == 1).collect();
        let mesh = Self { vertices, triangles, edges, triangle_edges, boundary_edge };
        mesh.check_invariants_with(&share)?;
        Ok(mesh)
    }

    fn check_invariants_with(&self, share: &[usize]) -> Result<(), MeshError> {
        if self.triangles.is_empty() {
            return Err(violation("nonempty", "mesh has no triangles"));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                let kind = if area == 0.0 { "degenerate" } else { "clockwise" };
                return Err(violation("positive area", format!("triangle {t} {tri:?} is {kind}")));
            }
        }
        if let Some(e) = share.iter().position(|&s| s > 2) {
            return Err(violation("edge sharing", format!("edge {:?} is shared by {} triangles", self.edges[e], share[e])));
        }
        let mut used = vec![false; self.vertices.len()];
        self.triangles.iter().flatten().for_each(|&v| used[v] = true);
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(violation("vertex usage", format!("vertex {v} belongs to no triangle")));
        }
        let euler = self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64 + 1;
        if euler != 2 {
            return Err(violation(
                "Euler relation",
                format!("V - E + (T + 1) = {euler}; domain is not simply connected or the mesh is not a manifold"),
            ));
        }
        // a hanging vertex would sit inside a boundary-flagged edge
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if !self.boundary_edge[e] {
                continue;
            }
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len = dist(pa, pb);
            for (v, &p) in self.vertices.iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                if cross.abs() > 1e-12 * len * len {
                    continue;
                }
                let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / (len * len);
                if t > 1e-12 && t < 1.0 - 1e-12 {
                    return Err(violation("conformity", format!("vertex {v} hangs on edge {:?}", [a, b])));
                }
            }
        }
        Ok(())
    }

    /// Re-runs every invariant check.
    pub fn check_invariants(&self) -> Result<(), MeshError> {
        let mut share = vec![0usize; self.edges.len()];
        self.triangle_edges.iter().flatten().for_each(|&e| share[e] += 1);
        self.check_invariants_with(&share)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_edges(&self) -> &[bool] {
        &self.boundary_edge
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.boundary_edge.iter().filter(|&&b| b).count()
    }

    /// Per-vertex flag: the vertex is an endpoint of a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if self.boundary_edge[e] {
                flags[a] = true;
                flags[b] = true;
            }
        }
        flags
    }

    pub fn triangle_coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    pub fn metrics(&self) -> MeshMetrics {
        let (mut h_max, mut h_min) = (0.0f64, f64::INFINITY);
        for e in 0..self.edges.len() {
            let l = self.edge_length(e);
            h_max = h_max.max(l);
            h_min = h_min.min(l);
        }
        let mut min_angle = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let p = self.triangle_coords(t);
            for i in 0..3 {
                let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                let (ab, ac, bc) = (dist(a, b), dist(a, c), dist(b, c));
                let cos = ((ab * ab + ac * ac - bc * bc) / (2.0 * ab * ac)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cos.acos().to_degrees());
            }
        }
        MeshMetrics { h_max, h_min, min_angle }
    }

    /// Red refinement: every triangle is split into four similar children
    /// through its edge midpoints. Midpoint of edge `e` becomes vertex
    /// `num_vertices + e`.
    pub fn refine_red(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|&[a, b]| {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&self.triangle_edges) {
            let [a, b, c] = *tri;
            let [ma, mb, mc] = [nv + te[0], nv + te[1], nv + te[2]];
            triangles.push([a, mc, mb]);
            triangles.push([mc, b, ma]);
            triangles.push([mb, ma, c]);
            triangles.push([ma, mb, mc]);
        }
        Self::new(vertices, triangles).expect("red refinement preserves mesh invariants")
    }

    pub fn refine_red_times(&self, times: usize) -> Self {
        (0..times).fold(self.clone(), |m, _| m.refine_red())
    }
}

/// `[0, width] × [0, height]` split into `nx × ny` cells, each cut along its
/// lower-left to upper-right diagonal.
pub fn structured_rectangle(nx: usize, ny: usize, width: f64, height: f64) -> Result<TriangleMesh, MeshError> {
    if nx == 0 || ny == 0 || !(width > 0.0) || !(height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(MeshError::InvalidDims(format!("nx={nx}, ny={ny}, width={width}, height={height}")));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Unit square with an `n × n` structured triangulation.
pub fn unit_square(n: usize) -> Result<TriangleMesh, MeshError> {
    structured_rectangle(n, n, 1.0, 1.0)
}
