//! Scalar and tangent fields on a sample set, and their derivatives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::SampleSet;
use super::source::Jet;
use crate::error::{domain, Error, Result};
use crate::linalg::{dot, inverse, Square};

/// Values aligned index-for-index with a [`SampleSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub name: String,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    pub fn constant(set: &SampleSet, c: f64) -> Self {
        Self::new(format!("{c}"), vec![c; set.len()])
    }

    pub fn from_fn(set: &SampleSet, name: impl Into<String>, f: impl Fn(usize) -> f64 + Sync + Send) -> Self {
        Self::new(name, (0..set.len()).into_par_iter().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_aligned(&self, set: &SampleSet) -> Result<()> {
        if self.values.len() != set.len() {
            return Err(Error::Data(format!(
                "field '{}' has {} values but the sample set has {} samples",
                self.name,
                self.values.len(),
                set.len()
            )));
        }
        Ok(())
    }
}

/// Tangent vectors stored as coordinates in each sample's frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    n: usize,
    coords: Vec<f64>,
    /// Samples whose vector could not be determined (set to zero).
    pub flagged: Vec<bool>,
}

impl TangentField {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.flagged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    /// The vector at sample `i` in ambient coordinates.
    pub fn ambient(&self, set: &SampleSet, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (a, c) in self.coords(i).iter().enumerate() {
            for (o, e) in out.iter_mut().zip(set.frame_vector(i, a)) {
                *o += c * e;
            }
        }
        out
    }

    pub fn dot_at(&self, other: &TangentField, i: usize) -> f64 {
        dot(self.coords(i), other.coords(i))
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }
}

/// `ρ = ⟨x, N⟩` per sample.
pub fn support_function(set: &SampleSet) -> ScalarField {
    ScalarField::new("support", set.supports().to_vec())
}

/// `x^T = x - ρN` in frame coordinates.
pub fn tangential_component(set: &SampleSet) -> TangentField {
    let n = set.dim();
    let mut coords = vec![0.0; set.len() * n];
    coords.par_chunks_mut(n).enumerate().for_each(|(i, c)| {
        for (a, v) in c.iter_mut().enumerate() {
            *v = dot(set.position(i), set.frame_vector(i, a));
        }
    });
    TangentField {
        n,
        coords,
        flagged: vec![false; set.len()],
    }
}

/// A smooth function on the ambient space, restricted to the surface.
pub trait AmbientFunction: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `(n+1)×(n+1)`.
    fn hessian(&self, x: &[f64], out: &mut [f64]);
    fn name(&self) -> String;
}

/// `|x|²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredNorm;

impl AmbientFunction for SquaredNorm {
    fn value(&self, x: &[f64]) -> f64 {
        dot(x, x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = 2.0 * v;
        }
    }
    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..d {
            out[k * d + k] = 2.0;
        }
    }
    fn name(&self) -> String {
        "|x|^2".into()
    }
}

/// `⟨x, e⟩`.
#[derive(Debug, Clone)]
pub struct LinearFunction(pub Vec<f64>);

impl AmbientFunction for LinearFunction {
    fn value(&self, x: &[f64]) -> f64 {
        dot(x, &self.0)
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn name(&self) -> String {
        format!("<x,{:?}>", self.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFunction(pub f64);

impl AmbientFunction for ConstantFunction {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn name(&self) -> String {
        format!("{}", self.0)
    }
}

pub fn evaluate(set: &SampleSet, f: &dyn AmbientFunction) -> ScalarField {
    ScalarField::from_fn(set, f.name(), |i| f.value(set.position(i)))
}

/// A field whose spread is at roundoff level relative to its magnitude.
/// Spectral differentiation would amplify that noise (worst near the
/// poles of spherical charts), so such fields get exact zero derivatives.
pub(crate) fn is_numerically_constant(values: &[f64]) -> bool {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let scale = lo.abs().max(hi.abs());
    values.is_empty() || hi - lo <= 1e3 * f64::EPSILON * scale
}

/// Parameter derivatives of a grid field: `first[i]` is `∂_i u`,
/// `second[i*n+j]` is `∂_i∂_j u`. `None` for a numerically constant field.
pub(crate) struct GridDerivatives {
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

pub(crate) fn grid_derivatives(set: &SampleSet, values: &[f64], with_second: bool) -> Result<Option<GridDerivatives>> {
    let grid = set
        .grid()
        .ok_or_else(|| domain("parameter derivatives need an analytic or implicit sample set"))?;
    if is_numerically_constant(values) {
        return Ok(None);
    }
    let n = set.dim();
    let first: Vec<Vec<f64>> = (0..n).map(|i| grid.derivative(values, i)).collect();
    let mut second = vec![Vec::new(); if with_second { n * n } else { 0 }];
    if with_second {
        for i in 0..n {
            for j in i..n {
                let d = grid.derivative(&first[i], j);
                if i != j {
                    second[j * n + i] = d.clone();
                }
                second[i * n + j] = d;
            }
        }
    }
    Ok(Some(GridDerivatives { first, second }))
}

/// `R` with `J = E R` at sample `i`, recomputed from the immersion.
pub(crate) fn metric_factor(set: &SampleSet, i: usize, jet: &mut Jet, u: &mut [f64]) -> Result<Square> {
    let (imm, grid) = set
        .immersion()
        .zip(set.grid())
        .ok_or_else(|| domain("metric data needs an analytic or implicit sample set"))?;
    grid.node(i, u);
    imm.eval(u, jet);
    let n = set.dim();
    let mut r = Square::zeros(n);
    for a in 0..n {
        for j in 0..n {
            r.set(a, j, dot(set.frame_vector(i, a), jet.tangent(j)));
        }
    }
    Ok(r)
}

/// Surface gradient `∇u` in frame coordinates. Parametrized sets use
/// spectral parameter derivatives and `R⁻ᵀ ∂u`; meshes use a
/// least-squares fit over the 1-ring in the tangent plane.
pub fn tangential_gradient(set: &SampleSet, field: &ScalarField) -> Result<TangentField> {
    field.check_aligned(set)?;
    if set.grid().is_some() {
        param_gradient(set, &field.values)
    } else if let Some(mesh) = set.mesh() {
        Ok(mesh_gradient(set, mesh, &field.values))
    } else {
        Err(domain("tangential gradient needs a parametrized or mesh sample set"))
    }
}

fn param_gradient(set: &SampleSet, values: &[f64]) -> Result<TangentField> {
    let n = set.dim();
    let mut coords = vec![0.0; set.len() * n];
    let Some(der) = grid_derivatives(set, values, false)? else {
        return Ok(TangentField {
            n,
            coords,
            flagged: vec![false; set.len()],
        });
    };
    let failed = coords
        .par_chunks_mut(n)
        .enumerate()
        .map_init(
            || (Jet::new(n), vec![0.0; n]),
            |(jet, u), (i, c)| -> Result<()> {
                let r = metric_factor(set, i, jet, u)?;
                let r_inv = inverse(&r).ok_or(Error::Sampling {
                    node: i,
                    reason: "singular metric factor".into(),
                })?;
                // c = R⁻ᵀ ∂u
                for (a, ca) in c.iter_mut().enumerate() {
                    *ca = (0..n).map(|j| r_inv.get(j, a) * der.first[j][i]).sum();
                }
                Ok(())
            },
        )
        .find_first(|r| r.is_err());
    if let Some(Err(e)) = failed {
        return Err(e);
    }
    Ok(TangentField {
        n,
        coords,
        flagged: vec![false; set.len()],
    })
}

fn mesh_gradient(set: &SampleSet, mesh: &super::mesh::TriMesh, values: &[f64]) -> TangentField {
    let rings = mesh.vertex_neighbors();
    let mut coords = vec![0.0; set.len() * 2];
    let mut flagged = vec![false; set.len()];
    coords
        .par_chunks_mut(2)
        .zip(flagged.par_iter_mut())
        .enumerate()
        .for_each(|(i, (c, flag))| {
            let p = set.position(i);
            let (e1, e2) = (set.frame_vector(i, 0), set.frame_vector(i, 1));
            let (mut m00, mut m01, mut m11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &j in &rings[i] {
                let q = set.position(j);
                let v = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let (t0, t1) = (dot(&v, e1), dot(&v, e2));
                let du = values[j] - values[i];
                m00 += t0 * t0;
                m01 += t0 * t1;
                m11 += t1 * t1;
                b0 += t0 * du;
                b1 += t1 * du;
            }
            let det = m00 * m11 - m01 * m01;
            let tr = m00 + m11;
            if set.is_flagged(i) || rings[i].len() < 2 || !(det > 1e-12 * tr * tr) {
                *flag = true;
                return;
            }
            c[0] = (m11 * b0 - m01 * b1) / det;
            c[1] = (m00 * b1 - m01 * b0) / det;
        });
    TangentField {
        n: 2,
        coords,
        flagged,
    }
}

/// Surface Hessian `∇²u` of a grid field in frame coordinates, row-major
/// `n×n` per sample: `∂_i∂_j u - ⟨x_ij, ∇u⟩` mapped through `R⁻¹`.
pub(crate) fn grid_field_hessians(set: &SampleSet, values: &[f64]) -> Result<Vec<f64>> {
    let n = set.dim();
    let d = n + 1;
    let mut out = vec![0.0; set.len() * n * n];
    let Some(der) = grid_derivatives(set, values, true)? else {
        return Ok(out);
    };
    let failed = out
        .par_chunks_mut(n * n)
        .enumerate()
        .map_init(
            || (Jet::new(n), vec![0.0; n]),
            |(jet, u), (i, h)| -> Result<()> {
                let r = metric_factor(set, i, jet, u)?;
                let r_inv = inverse(&r).ok_or(Error::Sampling {
                    node: i,
                    reason: "singular metric factor".into(),
                })?;
                let mut grad = vec![0.0; d];
                for a in 0..n {
                    let ca: f64 = (0..n).map(|j| r_inv.get(j, a) * der.first[j][i]).sum();
                    for (g, e) in grad.iter_mut().zip(set.frame_vector(i, a)) {
                        *g += ca * e;
                    }
                }
                let mut hp = Square::zeros(n);
                for p in 0..n {
                    for q in 0..n {
                        hp.set(p, q, der.second[p * n + q][i] - dot(jet.second(p, q), &grad));
                    }
                }
                let hf = super::sample::to_frame(&hp, &r_inv).symmetrized();
                h.copy_from_slice(hf.as_slice());
                Ok(())
            },
        )
        .find_first(|r| r.is_err());
    if let Some(Err(e)) = failed {
        return Err(e);
    }
    Ok(out)
}

/// Surface Hessian of an ambient function in frame coordinates:
/// `D²f(e_a, e_b) + ⟨Df, N⟩ A_ab`.
pub(crate) fn ambient_hessians(set: &SampleSet, f: &dyn AmbientFunction) -> Vec<f64> {
    let n = set.dim();
    let d = n + 1;
    let mut out = vec![0.0; set.len() * n * n];
    out.par_chunks_mut(n * n).enumerate().for_each(|(i, h)| {
        let x = set.position(i);
        let mut g = vec![0.0; d];
        let mut dd = vec![0.0; d * d];
        f.gradient(x, &mut g);
        f.hessian(x, &mut dd);
        let gn = dot(&g, set.normal(i));
        let a = set.shape_op(i);
        for p in 0..n {
            let ep = set.frame_vector(i, p);
            for q in 0..n {
                let eq = set.frame_vector(i, q);
                let mut v = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        v += ep[k] * dd[k * d + l] * eq[l];
                    }
                }
                h[p * n + q] = v + gn * a.get(p, q);
            }
        }
    });
    out
}
