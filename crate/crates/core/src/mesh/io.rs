use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{signed_area, MeshError, Point, TriangleMesh};

const MAGIC: &str = "eigmesh 1";

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh,
    /// Clockwise triangles that were flipped to counterclockwise on load.
    pub reoriented: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

/// Parses the `eigmesh 1` text format. `#` starts a comment.
pub fn parse_mesh(text: &str) -> Result<LoadedMesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let last_line = text.lines().count().max(1);
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(last_line, format!("unexpected end of file, expected {what}")));

    let (ln, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["eigmesh", "1"] {
        return Err(parse_err(ln, format!("expected `{MAGIC}`, found `{header}`")));
    }
    let (ln, counts) = next("vertex and triangle counts")?;
    let [nv, nt] = fields::<usize, 2>(ln, counts)?;

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex coordinates")?;
        let p = fields::<f64, 2>(ln, l)?;
        if !p.iter().all(|c| c.is_finite()) {
            return Err(parse_err(ln, "non-finite coordinate"));
        }
        vertices.push(p);
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut reoriented = 0;
    for _ in 0..nt {
        let (ln, l) = next("triangle")?;
        let mut tri = fields::<usize, 3>(ln, l)?;
        if let Some(&bad) = tri.iter().find(|&&v| v >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range (nv = {nv})")));
        }
        let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if area < 0.0 {
            tri.swap(1, 2);
            reoriented += 1;
        }
        triangles.push(tri);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(parse_err(ln, format!("trailing content `{l}`")));
    }
    let mesh = TriangleMesh::new(vertices, triangles)?;
    Ok(LoadedMesh { mesh, reoriented })
}

fn fields<T: std::str::FromStr, const N: usize>(line: usize, text: &str) -> Result<[T; N], MeshError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != N {
        return Err(parse_err(line, format!("expected {N} fields, found {}", parts.len())));
    }
    let mut out = Vec::with_capacity(N);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| parse_err(line, format!("cannot parse `{p}`")))?);
    }
    Ok(out.try_into().ok().expect("length checked"))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MeshError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_mesh(&text)
}

/// Serializes with 17 significant digits, so a reload is bitwise exact.
pub fn write_mesh(m: &TriangleMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "{} {}", m.num_vertices(), m.num_triangles());
    for p in m.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e}", p[0], p[1]);
    }
    for t in m.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn save_mesh(m: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    fs::write(path, write_mesh(m)).map_err(|e| MeshError::Io { path: path.display().to_string(), message: e.to_string() })
}
