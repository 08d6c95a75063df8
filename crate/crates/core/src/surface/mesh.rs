//! Closed triangle meshes: validation, statistics and OFF/OBJ ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cross3, dot, norm};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{format} parse error at line {line} (byte offset {offset}): {message}")]
    Parse {
        format: &'static str,
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("unsupported mesh format for {0:?} (expected .off or .obj)")]
    UnsupportedFormat(String),
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("vertex {0} is not referenced by any triangle")]
    IsolatedVertex(usize),
    #[error("mesh not closed: edge ({a}, {b}) is shared by {count} triangle(s)")]
    NotClosed { a: usize, b: usize, count: usize },
    #[error("mesh not consistently oriented: edge ({a}, {b}) is traversed twice in the same direction")]
    Inconsistent { a: usize, b: usize },
    #[error("degenerate triangle {face}: area {area:e} below {threshold:e}")]
    Degenerate {
        face: usize,
        area: f64,
        threshold: f64,
    },
    #[error("vertex {vertex} has non-finite coordinates")]
    NonFinite { vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub name: String,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub components: usize,
    /// Total genus of a closed orientable surface, `c - χ/2`.
    pub genus: i64,
}

/// Triangles smaller than this fraction of the mean triangle area are
/// rejected as degenerate.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-14;

impl TriMesh {
    pub fn new(name: impl Into<String>, vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Self {
        Self {
            name: name.into(),
            vertices,
            triangles,
        }
    }

    pub fn triangle_area(&self, f: usize) -> f64 {
        0.5 * norm(&self.triangle_cross(f))
    }

    /// `(p1 - p0) × (p2 - p0)`; twice the area times the unit face normal.
    pub fn triangle_cross(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[f];
        let p0 = self.vertices[a];
        let e1 = sub(&self.vertices[b], &p0);
        let e2 = sub(&self.vertices[c], &p0);
        cross3(&e1, &e2)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|f| self.triangle_area(f)).sum()
    }

    /// Signed enclosed volume; positive when the winding makes face normals
    /// point outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let cr = cross3(&self.vertices[b], &self.vertices[c]);
                dot(&self.vertices[a], &cr) / 6.0
            })
            .sum()
    }

    pub fn reversed(&self) -> Self {
        Self {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            triangles: self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    pub fn translated(&self, offset: [f64; 3]) -> Self {
        Self {
            name: self.name.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Sorted 1-ring neighbor lists.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![BTreeSet::new(); self.vertices.len()];
        for &[a, b, c] in &self.triangles {
            sets[a].extend([b, c]);
            sets[b].extend([a, c]);
            sets[c].extend([a, b]);
        }
        sets.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Incident triangle indices per vertex, in face order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (f, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(f);
            }
        }
        out
    }

    /// Checks closedness, consistent orientation and non-degeneracy.
    pub fn validate(&self) -> Result<MeshStats, MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = self.vertices.len();
        if let Some(v) = self.vertices.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(MeshError::NonFinite { vertex: v });
        }
        let mut used = vec![false; nv];
        for (f, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: v,
                        count: nv,
                    });
                }
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::IsolatedVertex(v));
        }

        let mean_area = self.area() / self.triangles.len() as f64;
        let threshold = DEGENERATE_AREA_FRACTION * mean_area;
        for (f, &[a, b, c]) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(f);
            if a == b || b == c || a == c || !(area > threshold) {
                return Err(MeshError::Degenerate {
                    face: f,
                    area,
                    threshold,
                });
            }
        }

        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *directed.entry((p, q)).or_default() += 1;
            }
        }
        let mut undirected: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (&(p, q), &count) in &directed {
            *undirected.entry((p.min(q), p.max(q))).or_default() += count;
        }
        for (&(a, b), &count) in &undirected {
            if count != 2 {
                return Err(MeshError::NotClosed { a, b, count });
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(MeshError::Inconsistent { a, b });
            }
        }

        let components = self.count_components();
        let edges = undirected.len();
        let euler = nv as i64 - edges as i64 + self.triangles.len() as i64;
        Ok(MeshStats {
            vertices: nv,
            edges,
            faces: self.triangles.len(),
            euler_characteristic: euler,
            components,
            genus: components as i64 - euler / 2,
        })
    }

    fn count_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c)] {
                let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
                if rp != rq {
                    parent[rp.max(rq)] = rp.min(rq);
                }
            }
        }
        (0..self.vertices.len())
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }

    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), self.triangles.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Non-blank, comment-stripped lines with their 1-based number and byte
/// offset.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').enumerate().filter_map(move |(i, raw)| {
        let start = offset;
        offset += raw.len();
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, start, body))
    })
}

pub fn parse_off(name: &str, text: &str) -> Result<TriMesh, MeshError> {
    let err = |line: usize, offset: usize, message: String| MeshError::Parse {
        format: "OFF",
        line,
        offset,
        message,
    };
    let mut lines = content_lines(text);
    let (line, offset, header) = lines
        .next()
        .ok_or_else(|| err(1, 0, "empty file".into()))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| err(line, offset, format!("expected OFF header, found {header:?}")))?
        .trim();
    let (line, offset, counts) = if rest.is_empty() {
        lines
            .next()
            .ok_or_else(|| err(line, offset, "missing vertex/face counts".into()))?
    } else {
        (line, offset, rest)
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| err(line, offset, format!("bad counts line {counts:?}: {e}")))?;
    if counts.len() < 2 {
        return Err(err(line, offset, "counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let (line, offset, body) = lines
            .next()
            .ok_or_else(|| err(line, offset, format!("file ends after {k} of {nv} vertices")))?;
        let coords: Vec<f64> = body
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(line, offset, format!("bad vertex coordinate: {e}")))?;
        if coords.len() != 3 {
            return Err(err(line, offset, "vertex needs three coordinates".into()));
        }
        vertices.push([coords[0], coords[1], coords[2]]);
    }

    let mut triangles = Vec::with_capacity(nf);
    for k in 0..nf {
        let (line, offset, body) = lines
            .next()
            .ok_or_else(|| err(line, offset, format!("file ends after {k} of {nf} faces")))?;
        let fields: Vec<usize> = body
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(line, offset, format!("bad face index: {e}")))?;
        match fields.split_first() {
            Some((3, idx)) if idx.len() >= 3 => triangles.push([idx[0], idx[1], idx[2]]),
            Some((3, _)) => return Err(err(line, offset, "face lists fewer than 3 indices".into())),
            Some((k, _)) => {
                return Err(err(
                    line,
                    offset,
                    format!("face with {k} vertices; only triangles are supported"),
                ))
            }
            None => return Err(err(line, offset, "empty face".into())),
        }
    }
    Ok(TriMesh::new(name, vertices, triangles))
}

pub fn parse_obj(name: &str, text: &str) -> Result<TriMesh, MeshError> {
    let err = |line: usize, offset: usize, message: String| MeshError::Parse {
        format: "OBJ",
        line,
        offset,
        message,
    };
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles = Vec::new();
    for (line, offset, body) in content_lines(text) {
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(line, offset, format!("bad vertex coordinate: {e}")))?;
                if coords.len() != 3 {
                    return Err(err(line, offset, "vertex needs three coordinates".into()));
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tokens {
                    let first = t.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|e| err(line, offset, format!("bad face index {t:?}: {e}")))?;
                    let resolved = match raw {
                        0 => return Err(err(line, offset, "face index 0 is invalid".into())),
                        r if r > 0 => r - 1,
                        r => vertices.len() as i64 + r,
                    };
                    if resolved < 0 {
                        return Err(err(line, offset, format!("relative index {raw} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(err(line, offset, "face needs at least 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(name, vertices, triangles))
}

/// Reads an OFF or OBJ file, chosen by extension.
pub fn load_mesh(path: &Path) -> Result<TriMesh, crate::Error> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let text = std::fs::read_to_string(path)?;
    let mesh = match ext.as_str() {
        "off" => parse_off(&name, &text)?,
        "obj" => parse_obj(&name, &text)?,
        _ => return Err(MeshError::UnsupportedFormat(name).into()),
    };
    Ok(mesh)
}
