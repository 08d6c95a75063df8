//! Quadrature samples of a hypersurface, stored column-wise.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::TriMesh;
use super::source::{ImplicitFunction, Immersion, Jet, Orientation, SourceKind, SurfaceSource};
use crate::error::{domain, Error, Result};
use crate::kernel::{self, CurvatureProfile, NewtonFamily};
use crate::linalg::{dot, gram_schmidt, inverse, norm, symmetric_eigenvalues, Square};
use crate::quadrature::{differentiation_matrix, pairwise_sum, GaussLegendre};

/// Smallest admissible normalized Gram determinant `det g / ∏ g_ii` at a
/// quadrature node. Normalizing keeps valid nodes next to coordinate poles,
/// where `det g` itself is tiny but the tangents are far from dependent.
pub const SINGULAR_METRIC: f64 = 1e-14;
pub const MIN_RESOLUTION: usize = 4;

/// Tensor-product Gauss–Legendre grid on a parameter box. Flat sample
/// index is row-major with the last axis fastest.
#[derive(Debug)]
pub struct ParamGrid {
    axes: Vec<GaussLegendre>,
    strides: Vec<usize>,
    diff: Vec<OnceLock<Vec<f64>>>,
}

impl ParamGrid {
    pub fn new(domain: &[(f64, f64)], resolution: usize) -> Self {
        let axes: Vec<GaussLegendre> = domain
            .iter()
            .map(|&(lo, hi)| GaussLegendre::new(resolution, lo, hi))
            .collect();
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let diff = axes.iter().map(|_| OnceLock::new()).collect();
        Self {
            axes,
            strides,
            diff,
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(GaussLegendre::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, i: usize) -> &GaussLegendre {
        &self.axes[i]
    }

    /// Parameter point and tensor quadrature weight of flat index `idx`.
    pub fn node(&self, idx: usize, u: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for (i, axis) in self.axes.iter().enumerate() {
            let k = (idx / self.strides[i]) % axis.len();
            u[i] = axis.nodes[k];
            w *= axis.weights[k];
        }
        w
    }

    fn diff_matrix(&self, axis: usize) -> &[f64] {
        self.diff[axis].get_or_init(|| differentiation_matrix(&self.axes[axis].nodes))
    }

    /// Spectral derivative of grid values along one parameter axis.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let d = self.diff_matrix(axis);
        let m = self.axes[axis].len();
        let stride = self.strides[axis];
        let mut out = vec![0.0; values.len()];
        out.par_chunks_mut(4096)
            .enumerate()
            .for_each(|(chunk, out)| {
                for (off, o) in out.iter_mut().enumerate() {
                    let idx = chunk * 4096 + off;
                    let k = (idx / stride) % m;
                    let base = idx - k * stride;
                    let row = &d[k * m..(k + 1) * m];
                    *o = row
                        .iter()
                        .enumerate()
                        .map(|(j, dj)| dj * values[base + j * stride])
                        .sum();
                }
            });
        out
    }
}

pub(crate) enum Geometry {
    Param {
        immersion: Arc<dyn Immersion>,
        grid: Arc<ParamGrid>,
    },
    Mesh {
        mesh: Arc<TriMesh>,
    },
    Detached,
}

impl Clone for Geometry {
    fn clone(&self) -> Self {
        match self {
            Geometry::Param { immersion, grid } => Geometry::Param {
                immersion: Arc::clone(immersion),
                grid: Arc::clone(grid),
            },
            Geometry::Mesh { mesh } => Geometry::Mesh {
                mesh: Arc::clone(mesh),
            },
            Geometry::Detached => Geometry::Detached,
        }
    }
}

/// One quadrature point, as an owned value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSample {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    /// `n` orthonormal tangent vectors.
    pub frame: Vec<Vec<f64>>,
    /// Shape operator `A = -dN` in `frame`.
    pub shape_op: Square,
    pub weight: f64,
    pub support_value: f64,
    pub flagged: bool,
}

/// Per-sample curvature data derived from the shape operators.
#[derive(Debug, Clone)]
pub struct CurvatureTable {
    n: usize,
    kappas: Vec<f64>,
    s: Vec<f64>,
    h: Vec<f64>,
    norm_sq_a: Vec<f64>,
    trace_a3: Vec<f64>,
}

impl CurvatureTable {
    fn build(set: &SampleSet) -> Self {
        let n = set.n;
        let len = set.len();
        let mut kappas = vec![0.0; len * n];
        let mut s = vec![0.0; len * (n + 1)];
        let mut h = vec![0.0; len * (n + 1)];
        let mut norm_sq_a = vec![0.0; len];
        let mut trace_a3 = vec![0.0; len];
        (
            kappas.par_chunks_mut(n),
            s.par_chunks_mut(n + 1),
            h.par_chunks_mut(n + 1),
            norm_sq_a.par_iter_mut(),
            trace_a3.par_iter_mut(),
        )
            .into_par_iter()
            .enumerate()
            .for_each(|(i, (k, s, h, a2, a3))| {
                let values = symmetric_eigenvalues(&set.shape_op(i));
                let p = kernel::profile_from_values(&values);
                k.copy_from_slice(&values);
                s.copy_from_slice(&p.s);
                h.copy_from_slice(&p.h);
                *a2 = p.norm_sq_a;
                *a3 = p.trace_a3;
            });
        Self {
            n,
            kappas,
            s,
            h,
            norm_sq_a,
            trace_a3,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.norm_sq_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norm_sq_a.is_empty()
    }

    /// Principal curvatures of sample `i`, ascending.
    pub fn kappas(&self, i: usize) -> &[f64] {
        &self.kappas[i * self.n..(i + 1) * self.n]
    }

    /// `S_r` at sample `i`; zero for `r > n`.
    pub fn s(&self, i: usize, r: usize) -> f64 {
        if r > self.n {
            0.0
        } else {
            self.s[i * (self.n + 1) + r]
        }
    }

    /// `H_r` at sample `i`; zero for `r > n`.
    pub fn h(&self, i: usize, r: usize) -> f64 {
        if r > self.n {
            0.0
        } else {
            self.h[i * (self.n + 1) + r]
        }
    }

    pub fn big_h(&self, i: usize) -> f64 {
        self.s(i, 1)
    }

    pub fn norm_sq_a(&self, i: usize) -> f64 {
        self.norm_sq_a[i]
    }

    pub fn trace_a3(&self, i: usize) -> f64 {
        self.trace_a3[i]
    }

    pub fn profile(&self, i: usize) -> CurvatureProfile {
        let d = self.n + 1;
        CurvatureProfile {
            s: self.s[i * d..(i + 1) * d].to_vec(),
            h: self.h[i * d..(i + 1) * d].to_vec(),
            norm_sq_a: self.norm_sq_a[i],
            trace_a3: self.trace_a3[i],
            big_h: self.s(i, 1),
        }
    }

    pub fn s_values(&self, r: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.s(i, r)).collect()
    }

    pub fn h_values(&self, r: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.h(i, r)).collect()
    }
}

/// Immutable sampled hypersurface. All per-sample arrays share one index.
#[derive(Clone)]
pub struct SampleSet {
    n: usize,
    kind: SourceKind,
    source_id: String,
    orientation: Orientation,
    positions: Vec<f64>,
    normals: Vec<f64>,
    frames: Vec<f64>,
    shape_ops: Vec<f64>,
    weights: Vec<f64>,
    supports: Vec<f64>,
    flagged: Vec<bool>,
    total_area: f64,
    geometry: Geometry,
    curvature: OnceLock<Arc<CurvatureTable>>,
}

impl std::fmt::Debug for SampleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampleSet")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("source_id", &self.source_id)
            .field("orientation", &self.orientation)
            .field("samples", &self.len())
            .field("total_area", &self.total_area)
            .finish()
    }
}

impl SampleSet {
    fn allocate(n: usize, len: usize, kind: SourceKind, id: String, orientation: Orientation, geometry: Geometry) -> Self {
        let d = n + 1;
        Self {
            n,
            kind,
            source_id: id,
            orientation,
            positions: vec![0.0; len * d],
            normals: vec![0.0; len * d],
            frames: vec![0.0; len * n * d],
            shape_ops: vec![0.0; len * n * n],
            weights: vec![0.0; len],
            supports: vec![0.0; len],
            flagged: vec![false; len],
            total_area: 0.0,
            geometry,
            curvature: OnceLock::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.total_area = pairwise_sum(&self.weights);
        self
    }

    /// Builds a set from explicit samples (no parameter grid or mesh
    /// attached, so derivative-based operations are unavailable).
    pub fn from_samples(
        n: usize,
        samples: &[ShapeSample],
        kind: SourceKind,
        source_id: impl Into<String>,
        orientation: Orientation,
    ) -> Result<Self> {
        if n == 0 {
            return Err(domain("sample dimension must be >= 1"));
        }
        let d = n + 1;
        let mut set = Self::allocate(n, samples.len(), kind, source_id.into(), orientation, Geometry::Detached);
        for (i, s) in samples.iter().enumerate() {
            if s.position.len() != d
                || s.normal.len() != d
                || s.frame.len() != n
                || s.frame.iter().any(|e| e.len() != d)
                || s.shape_op.dim() != n
            {
                return Err(Error::Data(format!("sample {i} has inconsistent dimensions for n = {n}")));
            }
            if !(s.weight > 0.0) {
                return Err(Error::Data(format!("sample {i} has non-positive weight")));
            }
            let a = kernel::symmetrize(&s.shape_op)?;
            set.positions[i * d..(i + 1) * d].copy_from_slice(&s.position);
            set.normals[i * d..(i + 1) * d].copy_from_slice(&s.normal);
            for (a_idx, e) in s.frame.iter().enumerate() {
                let k = (i * n + a_idx) * d;
                set.frames[k..k + d].copy_from_slice(e);
            }
            set.shape_ops[i * n * n..(i + 1) * n * n].copy_from_slice(a.as_slice());
            set.weights[i] = s.weight;
            set.supports[i] = dot(&s.position, &s.normal);
            set.flagged[i] = s.flagged;
        }
        Ok(set.finish())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.n + 1;
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        let d = self.n + 1;
        &self.normals[i * d..(i + 1) * d]
    }

    /// Tangent vector `a` of the frame at sample `i`.
    pub fn frame_vector(&self, i: usize, a: usize) -> &[f64] {
        let d = self.n + 1;
        let k = (i * self.n + a) * d;
        &self.frames[k..k + d]
    }

    pub fn shape_op(&self, i: usize) -> Square {
        let nn = self.n * self.n;
        Square::from_row_major(self.n, self.shape_ops[i * nn..(i + 1) * nn].to_vec())
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self, i: usize) -> f64 {
        self.supports[i]
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn is_flagged(&self, i: usize) -> bool {
        self.flagged[i]
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }

    pub fn sample(&self, i: usize) -> ShapeSample {
        ShapeSample {
            position: self.position(i).to_vec(),
            normal: self.normal(i).to_vec(),
            frame: (0..self.n).map(|a| self.frame_vector(i, a).to_vec()).collect(),
            shape_op: self.shape_op(i),
            weight: self.weights[i],
            support_value: self.supports[i],
            flagged: self.flagged[i],
        }
    }

    /// Curvature data, computed on first use and cached.
    pub fn curvatures(&self) -> &CurvatureTable {
        self.curvature.get_or_init(|| Arc::new(CurvatureTable::build(self)))
    }

    pub fn newton_family(&self, i: usize) -> NewtonFamily {
        let s: Vec<f64> = (0..=self.n).map(|r| self.curvatures().s(i, r)).collect();
        kernel::newton_family_with(&self.shape_op(i), &s)
    }

    /// Same surface with the opposite unit normal: `N`, `A` and `ρ` change
    /// sign, positions, frames and weights are shared.
    pub fn reversed(&self) -> SampleSet {
        let mut out = self.clone();
        out.orientation = self.orientation.reversed();
        out.normals.iter_mut().for_each(|v| *v = -*v);
        out.shape_ops.iter_mut().for_each(|v| *v = -*v);
        out.supports.iter_mut().for_each(|v| *v = -*v);
        out.curvature = OnceLock::new();
        out
    }

    /// `|Σ w N| / area`, which vanishes for closed surfaces.
    pub fn normal_balance(&self) -> f64 {
        let d = self.n + 1;
        let sum: Vec<f64> = (0..d)
            .map(|k| {
                let terms: Vec<f64> = (0..self.len())
                    .map(|i| self.weights[i] * self.normals[i * d + k])
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        norm(&sum) / self.total_area
    }

    pub fn mesh(&self) -> Option<&Arc<TriMesh>> {
        match &self.geometry {
            Geometry::Mesh { mesh } => Some(mesh),
            _ => None,
        }
    }

    pub fn grid(&self) -> Option<&ParamGrid> {
        match &self.geometry {
            Geometry::Param { grid, .. } => Some(grid),
            _ => None,
        }
    }

    pub(crate) fn immersion(&self) -> Option<&Arc<dyn Immersion>> {
        match &self.geometry {
            Geometry::Param { immersion, .. } => Some(immersion),
            _ => None,
        }
    }
}

/// Unit normal completing the orthonormal columns `e` (`n` vectors in
/// Rⁿ⁺¹) to a positively oriented basis: `det[e | N] > 0`.
pub(crate) fn oriented_complement(e: &[f64], n: usize) -> Vec<f64> {
    let d = n + 1;
    if n == 2 {
        let c = crate::linalg::cross3(&e[0..3], &e[3..6]);
        let l = norm(&c);
        return c.iter().map(|v| v / l).collect();
    }
    // generalized cross product: N_k = (-1)^(k+n) det(e without row k)
    let mut out = vec![0.0; d];
    for (k, o) in out.iter_mut().enumerate() {
        let mut minor = Square::zeros(n);
        for c in 0..n {
            let mut row = 0;
            for r in 0..d {
                if r == k {
                    continue;
                }
                minor.set(row, c, e[c * d + r]);
                row += 1;
            }
        }
        let sign = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * crate::linalg::determinant(&minor);
    }
    let l = norm(&out);
    out.iter_mut().for_each(|v| *v /= l);
    out
}

/// Orthonormal tangent frame `E` and the triangular factor `R` with
/// `J = E R`, or a reason the metric is singular.
pub(crate) fn frame_from_jet(jet: &Jet) -> std::result::Result<(Vec<f64>, Square), String> {
    let n = jet.dim();
    let (e, r) = gram_schmidt(&jet.jacobian, n + 1, n, 1e-12)
        .ok_or_else(|| "parameter tangents are linearly dependent".to_string())?;
    let det_g: f64 = (0..n).map(|i| r.get(i, i) * r.get(i, i)).product();
    let diag: f64 = (0..n).map(|i| dot(jet.tangent(i), jet.tangent(i))).product();
    let normalized = det_g / diag;
    if !(normalized >= SINGULAR_METRIC) {
        return Err(format!(
            "singular metric, det g = {det_g:e} (normalized {normalized:e})"
        ));
    }
    Ok((e, r))
}

/// `R⁻ᵀ M R⁻¹` for a bilinear form `M` in parameter coordinates.
pub(crate) fn to_frame(m: &Square, r_inv: &Square) -> Square {
    r_inv.transpose().mul(m).mul(r_inv)
}

struct NodeOut<'a> {
    position: &'a mut [f64],
    normal: &'a mut [f64],
    frame: &'a mut [f64],
    shape_op: &'a mut [f64],
    weight: &'a mut f64,
    support: &'a mut f64,
}

/// Shared node loop for parametrized sources. `shape` receives the jet,
/// orthonormal frame, oriented normal and `R⁻¹` and returns the frame
/// shape operator.
fn sample_grid<F>(
    set: &mut SampleSet,
    immersion: &dyn Immersion,
    grid: &ParamGrid,
    normal_of: &(dyn Fn(&Jet, &[f64]) -> std::result::Result<Vec<f64>, String> + Sync),
    shape: &F,
) -> Result<()>
where
    F: Fn(&Jet, &[f64], &[f64], &Square) -> std::result::Result<Square, String> + Sync,
{
    let n = set.n;
    let d = n + 1;
    let failure = (
        set.positions.par_chunks_mut(d),
        set.normals.par_chunks_mut(d),
        set.frames.par_chunks_mut(n * d),
        set.shape_ops.par_chunks_mut(n * n),
        set.weights.par_iter_mut(),
        set.supports.par_iter_mut(),
    )
        .into_par_iter()
        .enumerate()
        .map_init(
            || (Jet::new(n), vec![0.0; n]),
            |(jet, u), (idx, (position, normal, frame, shape_op, weight, support))| {
                let out = NodeOut {
                    position,
                    normal,
                    frame,
                    shape_op,
                    weight,
                    support,
                };
                sample_node(idx, immersion, grid, jet, u, out, normal_of, shape)
                    .err()
                    .map(|reason| (idx, reason))
            },
        )
        .flatten()
        .min_by_key(|(idx, _)| *idx);
    match failure {
        Some((node, reason)) => Err(Error::Sampling { node, reason }),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn sample_node<F>(
    idx: usize,
    immersion: &dyn Immersion,
    grid: &ParamGrid,
    jet: &mut Jet,
    u: &mut [f64],
    out: NodeOut<'_>,
    normal_of: &(dyn Fn(&Jet, &[f64]) -> std::result::Result<Vec<f64>, String> + Sync),
    shape: &F,
) -> std::result::Result<(), String>
where
    F: Fn(&Jet, &[f64], &[f64], &Square) -> std::result::Result<Square, String>,
{
    let qw = grid.node(idx, u);
    immersion.eval(u, jet);
    if jet.point.iter().chain(&jet.jacobian).chain(&jet.hessian).any(|v| !v.is_finite()) {
        return Err(format!("non-finite immersion data at u = {u:?}"));
    }
    let (e, r) = frame_from_jet(jet)?;
    let normal = normal_of(jet, &e)?;
    let r_inv = inverse(&r).ok_or_else(|| "singular metric factor".to_string())?;
    let a = shape(jet, &e, &normal, &r_inv)?;
    let det_r: f64 = (0..r.dim()).map(|i| r.get(i, i)).product();
    out.position.copy_from_slice(&jet.point);
    out.normal.copy_from_slice(&normal);
    out.frame.copy_from_slice(&e);
    out.shape_op.copy_from_slice(a.symmetrized().as_slice());
    *out.weight = det_r.abs() * qw;
    *out.support = dot(&jet.point, &normal);
    Ok(())
}

/// Tensor Gauss–Legendre sampling of an analytic or implicit source with
/// `resolution` nodes per parameter axis.
pub fn sample_analytic(src: &SurfaceSource, resolution: usize) -> Result<SampleSet> {
    if resolution < MIN_RESOLUTION {
        return Err(domain(format!("resolution must be >= {MIN_RESOLUTION}, got {resolution}")));
    }
    match src {
        SurfaceSource::Analytic {
            immersion,
            orientation,
        } => {
            let n = immersion.dim();
            let grid = Arc::new(ParamGrid::new(&immersion.domain(), resolution));
            let mut set = SampleSet::allocate(
                n,
                grid.len(),
                SourceKind::Analytic,
                src.id(),
                *orientation,
                Geometry::Param {
                    immersion: Arc::clone(immersion),
                    grid: Arc::clone(&grid),
                },
            );
            let sign = immersion.normal_sign() * orientation.sign();
            let normal_of = move |_: &Jet, e: &[f64]| -> std::result::Result<Vec<f64>, String> {
                let mut nrm = oriented_complement(e, n);
                nrm.iter_mut().for_each(|v| *v *= sign);
                Ok(nrm)
            };
            let shape = |jet: &Jet, _: &[f64], nrm: &[f64], r_inv: &Square| {
                let mut b = Square::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        b.set(i, j, dot(jet.second(i, j), nrm));
                    }
                }
                Ok(to_frame(&b, r_inv))
            };
            sample_grid(&mut set, immersion.as_ref(), &grid, &normal_of, &shape)?;
            Ok(set.finish())
        }
        SurfaceSource::Implicit { .. } => sample_implicit(src, resolution),
        SurfaceSource::Mesh { .. } => Err(domain("sample_analytic needs an analytic or implicit source")),
    }
}

/// Level-set sampling: positions, frames and weights from the
/// parametrization, normal and shape operator from `∇F` and `∇²F`.
pub fn sample_implicit(src: &SurfaceSource, resolution: usize) -> Result<SampleSet> {
    if resolution < MIN_RESOLUTION {
        return Err(domain(format!("resolution must be >= {MIN_RESOLUTION}, got {resolution}")));
    }
    let SurfaceSource::Implicit {
        function,
        parametrization,
        orientation,
    } = src
    else {
        return match src {
            SurfaceSource::Analytic { .. } => sample_analytic(src, resolution),
            _ => Err(domain("sample_implicit needs an implicit source")),
        };
    };
    let n = parametrization.dim();
    let d = n + 1;
    let grid = Arc::new(ParamGrid::new(&parametrization.domain(), resolution));
    let mut set = SampleSet::allocate(
        n,
        grid.len(),
        SourceKind::Implicit,
        src.id(),
        *orientation,
        Geometry::Param {
            immersion: Arc::clone(parametrization),
            grid: Arc::clone(&grid),
        },
    );
    let sigma = orientation.sign();
    let f: &dyn ImplicitFunction = function.as_ref();
    let normal_of = move |jet: &Jet, _: &[f64]| -> std::result::Result<Vec<f64>, String> {
        let mut g = vec![0.0; d];
        f.gradient(&jet.point, &mut g);
        let l = norm(&g);
        if !(l > 1e-10) {
            return Err(format!("vanishing gradient |∇F| = {l:e}"));
        }
        Ok(g.iter().map(|v| sigma * v / l).collect())
    };
    let shape = move |jet: &Jet, e: &[f64], _: &[f64], _: &Square| {
        let mut g = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        f.gradient(&jet.point, &mut g);
        f.hessian(&jet.point, &mut hess);
        let l = norm(&g);
        let mut a = Square::zeros(n);
        for i in 0..n {
            let ei = &e[i * d..(i + 1) * d];
            for j in 0..n {
                let ej = &e[j * d..(j + 1) * d];
                let mut q = 0.0;
                for p in 0..d {
                    for r in 0..d {
                        q += ei[p] * hess[p * d + r] * ej[r];
                    }
                }
                a.set(i, j, -sigma * q / l);
            }
        }
        Ok(a)
    };
    sample_grid(&mut set, parametrization.as_ref(), &grid, &normal_of, &shape)?;
    Ok(set.finish())
}

/// Dispatches on the source kind; `resolution` is ignored for meshes.
pub fn sample(src: &SurfaceSource, resolution: usize) -> Result<SampleSet> {
    match src {
        SurfaceSource::Mesh { .. } => super::mesh_sample::sample_mesh(src),
        SurfaceSource::Analytic { .. } => sample_analytic(src, resolution),
        SurfaceSource::Implicit { .. } => sample_implicit(src, resolution),
    }
}

pub(crate) struct MeshArrays {
    pub normals: Vec<[f64; 3]>,
    pub frames: Vec<[[f64; 3]; 2]>,
    pub shape_ops: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    pub flagged: Vec<bool>,
}

pub(crate) fn mesh_set(
    mesh: Arc<TriMesh>,
    orientation: Orientation,
    arrays: MeshArrays,
) -> SampleSet {
    let len = mesh.vertices.len();
    let id = mesh.name.clone();
    let mut set = SampleSet::allocate(2, len, SourceKind::Mesh, id, orientation, Geometry::Mesh { mesh: Arc::clone(&mesh) });
    for i in 0..len {
        let p = mesh.vertices[i];
        set.positions[i * 3..i * 3 + 3].copy_from_slice(&p);
        set.normals[i * 3..i * 3 + 3].copy_from_slice(&arrays.normals[i]);
        set.frames[i * 6..i * 6 + 3].copy_from_slice(&arrays.frames[i][0]);
        set.frames[i * 6 + 3..i * 6 + 6].copy_from_slice(&arrays.frames[i][1]);
        set.shape_ops[i * 4..i * 4 + 4].copy_from_slice(&arrays.shape_ops[i]);
        set.weights[i] = arrays.weights[i];
        set.supports[i] = dot(&p, &arrays.normals[i]);
        set.flagged[i] = arrays.flagged[i];
    }
    set.finish()
}
