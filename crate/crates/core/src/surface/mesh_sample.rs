//! Per-vertex samples of a triangle mesh with quadric-fit shape operators.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::sample::{mesh_set, MeshArrays, SampleSet};
use super::source::SurfaceSource;
use crate::error::{domain, Result};
use crate::linalg::{cross3, dot, norm, symmetric_eigen, Square};

/// Fewer distinct 2-ring neighbors than this leaves the quadric fit
/// under-determined; the vertex is flagged.
pub const MIN_FIT_NEIGHBORS: usize = 5;

/// Relative singular-value cutoff of the quadric least-squares system.
const FIT_RANK_TOLERANCE: f64 = 1e-10;

/// Tangent frame `(e1, e2)` with `e1 × e2 = n`.
pub(crate) fn tangent_frame(n: [f64; 3]) -> [[f64; 3]; 2] {
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap();
    let mut t = [0.0; 3];
    t[axis] = 1.0;
    let c = dot(&t, &n);
    let mut e1 = [t[0] - c * n[0], t[1] - c * n[1], t[2] - c * n[2]];
    let l = norm(&e1);
    e1.iter_mut().for_each(|v| *v /= l);
    let e2 = cross3(&n, &e1);
    [e1, e2]
}

pub(crate) fn vertex_normals(mesh: &super::mesh::TriMesh, sign: f64) -> Vec<[f64; 3]> {
    let mut acc = vec![[0.0; 3]; mesh.vertices.len()];
    for (f, tri) in mesh.triangles.iter().enumerate() {
        // |cross| = 2·area, so this is the area-weighted face normal sum
        let c = mesh.triangle_cross(f);
        for &v in tri {
            for k in 0..3 {
                acc[v][k] += c[k];
            }
        }
    }
    acc.into_iter()
        .map(|a| {
            let l = norm(&a);
            [sign * a[0] / l, sign * a[1] / l, sign * a[2] / l]
        })
        .collect()
}

pub(crate) fn barycentric_areas(mesh: &super::mesh::TriMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.vertices.len()];
    for (f, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(f) / 3.0;
        for &v in tri {
            w[v] += a;
        }
    }
    w
}

fn two_rings(one_ring: &[Vec<usize>]) -> Vec<Vec<usize>> {
    one_ring
        .iter()
        .enumerate()
        .map(|(v, ring)| {
            let mut set: BTreeSet<usize> = ring.iter().copied().collect();
            for &u in ring {
                set.extend(one_ring[u].iter().copied());
            }
            set.remove(&v);
            set.into_iter().collect()
        })
        .collect()
}

/// Fits `ζ = ½aξ² + bξη + ½cη² + dξ + eη` in the frame at `p` and returns
/// the shape operator `g^{-1/2} b g^{-1/2}` in that frame.
fn quadric_shape_operator(
    p: [f64; 3],
    normal: [f64; 3],
    frame: &[[f64; 3]; 2],
    neighbors: impl Iterator<Item = [f64; 3]>,
) -> Option<[f64; 4]> {
    let local: Vec<[f64; 3]> = neighbors
        .map(|q| {
            let v = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
            [dot(&v, &frame[0]), dot(&v, &frame[1]), dot(&v, &normal)]
        })
        .collect();
    if local.len() < MIN_FIT_NEIGHBORS {
        return None;
    }
    let h = local.iter().map(|l| (l[0] * l[0] + l[1] * l[1]).sqrt()).sum::<f64>() / local.len() as f64;
    if !(h > 0.0) {
        return None;
    }
    // scaled coordinates keep the normal matrix well conditioned
    let rows = local.len();
    let mut m = DMatrix::<f64>::zeros(rows, 5);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (r, l) in local.iter().enumerate() {
        let (x, y) = (l[0] / h, l[1] / h);
        m[(r, 0)] = 0.5 * x * x;
        m[(r, 1)] = x * y;
        m[(r, 2)] = 0.5 * y * y;
        m[(r, 3)] = x;
        m[(r, 4)] = y;
        rhs[r] = l[2] / h;
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= FIT_RANK_TOLERANCE * smax {
        return None;
    }
    let sol = svd.solve(&rhs, FIT_RANK_TOLERANCE * smax).ok()?;
    let (a, b, c) = (sol[0] / h, sol[1] / h, sol[2] / h);
    let (d, e) = (sol[3], sol[4]);
    let w = (1.0 + d * d + e * e).sqrt();
    let second = Square::from_row_major(2, vec![a / w, b / w, b / w, c / w]);
    let metric = Square::from_row_major(2, vec![1.0 + d * d, d * e, d * e, 1.0 + e * e]);
    let (vals, vecs) = symmetric_eigen(&metric);
    let mut inv_sqrt = Square::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let v: f64 = (0..2)
                .map(|k| vecs.get(i, k) * vecs.get(j, k) / vals[k].sqrt())
                .sum();
            inv_sqrt.set(i, j, v);
        }
    }
    let op = inv_sqrt.mul(&second).mul(&inv_sqrt).symmetrized();
    let s = op.as_slice();
    s.iter().all(|v| v.is_finite()).then(|| [s[0], s[1], s[2], s[3]])
}

/// One sample per vertex: area-weighted normals, barycentric areas and a
/// quadric fit over the 2-ring. Vertices whose fit is under-determined are
/// flagged and carry a zero shape operator.
pub fn sample_mesh(src: &SurfaceSource) -> Result<SampleSet> {
    let SurfaceSource::Mesh {
        mesh, orientation, ..
    } = src
    else {
        return Err(domain("sample_mesh needs a mesh source"));
    };
    let normals = vertex_normals(mesh, orientation.sign());
    let weights = barycentric_areas(mesh);
    let rings = two_rings(&mesh.vertex_neighbors());
    let fitted: Vec<([[f64; 3]; 2], Option<[f64; 4]>)> = (0..mesh.vertices.len())
        .into_par_iter()
        .map(|v| {
            let frame = tangent_frame(normals[v]);
            let op = quadric_shape_operator(
                mesh.vertices[v],
                normals[v],
                &frame,
                rings[v].iter().map(|&u| mesh.vertices[u]),
            );
            (frame, op)
        })
        .collect();
    let arrays = MeshArrays {
        normals,
        frames: fitted.iter().map(|(f, _)| *f).collect(),
        shape_ops: fitted.iter().map(|(_, op)| op.unwrap_or([0.0; 4])).collect(),
        flagged: fitted.iter().map(|(_, op)| op.is_none()).collect(),
        weights,
    };
    Ok(mesh_set(std::sync::Arc::clone(mesh), *orientation, arrays))
}
