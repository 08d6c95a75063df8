//! Built-in closed hypersurfaces: round spheres and ellipsoids in any
//! dimension, the torus of revolution in R³, and triangle meshes of the
//! same shapes.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::TriMesh;
use super::source::{ImplicitFunction, Immersion, Jet, Orientation, SourceKind, SurfaceSource};
use crate::error::{domain, Result};
use crate::linalg::{determinant, Square};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    One,
    Sin,
    Cos,
}

impl Factor {
    /// `order`-th derivative at an angle with precomputed (sin, cos).
    #[inline]
    fn eval(self, order: usize, sc: (f64, f64)) -> f64 {
        let (s, c) = sc;
        match (self, order) {
            (Factor::One, 0) => 1.0,
            (Factor::One, _) => 0.0,
            (Factor::Sin, 0) => s,
            (Factor::Sin, 1) => c,
            (Factor::Sin, _) => -s,
            (Factor::Cos, 0) => c,
            (Factor::Cos, 1) => -s,
            (Factor::Cos, _) => -c,
        }
    }
}

/// Axis-scaled hyperspherical coordinates
/// `x = c + diag(axes) · s(θ_1, …, θ_{n-1}, φ)` with `θ_i ∈ (0, π)` and
/// `φ ∈ (0, 2π)`. Equal axes give the round sphere of that radius.
#[derive(Debug, Clone)]
pub struct ScaledHypersphere {
    n: usize,
    axes: Vec<f64>,
    center: Vec<f64>,
    factors: Vec<Vec<Factor>>,
    sign: f64,
    label: String,
}

impl ScaledHypersphere {
    pub fn new(axes: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let d = axes.len();
        if d < 2 {
            return Err(domain("hypersphere needs ambient dimension >= 2"));
        }
        if center.len() != d {
            return Err(domain(format!("center must have {d} coordinates")));
        }
        if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(domain("semi-axes must be positive and finite"));
        }
        let n = d - 1;
        let factors = (0..d)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        if k + 1 < n {
                            match j.cmp(&k) {
                                std::cmp::Ordering::Less => Factor::Sin,
                                std::cmp::Ordering::Equal => Factor::Cos,
                                std::cmp::Ordering::Greater => Factor::One,
                            }
                        } else if j + 1 < n {
                            Factor::Sin
                        } else if k + 1 == n {
                            Factor::Cos
                        } else {
                            Factor::Sin
                        }
                    })
                    .collect()
            })
            .collect();
        let round = axes.windows(2).all(|w| w[0] == w[1]);
        let label = if round {
            format!("sphere(n={n}, R={}, c={center:?})", axes[0])
        } else {
            format!("ellipsoid(n={n}, axes={axes:?}, c={center:?})")
        };
        let mut me = Self {
            n,
            axes,
            center,
            factors,
            sign: 1.0,
            label,
        };
        me.sign = me.outward_sign();
        Ok(me)
    }

    pub fn round(n: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        Self::new(vec![radius; n + 1], center)
    }

    /// Sign making the positively oriented tangent complement point away
    /// from the center.
    fn outward_sign(&self) -> f64 {
        let u: Vec<f64> = self
            .domain()
            .iter()
            .map(|(lo, hi)| 0.5 * (lo + hi) + 0.1)
            .collect();
        let mut jet = Jet::new(self.n);
        self.eval(&u, &mut jet);
        let d = self.n + 1;
        let mut m = Square::zeros(d);
        for i in 0..self.n {
            for r in 0..d {
                m.set(r, i, jet.tangent(i)[r]);
            }
        }
        for r in 0..d {
            m.set(r, self.n, jet.point[r] - self.center[r]);
        }
        if determinant(&m) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl Immersion for ScaledHypersphere {
    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        let mut d = vec![(0.0, PI); self.n - 1];
        d.push((0.0, TAU));
        d
    }

    fn eval(&self, u: &[f64], jet: &mut Jet) {
        let n = self.n;
        let sc: Vec<(f64, f64)> = u.iter().map(|t| t.sin_cos()).collect();
        for (k, factors) in self.factors.iter().enumerate() {
            let a = self.axes[k];
            let eval_with = |orders: &dyn Fn(usize) -> usize| -> f64 {
                factors
                    .iter()
                    .enumerate()
                    .map(|(j, f)| f.eval(orders(j), sc[j]))
                    .product::<f64>()
            };
            jet.point[k] = self.center[k] + a * eval_with(&|_| 0);
            for i in 0..n {
                jet.tangent_mut(i)[k] = a * eval_with(&|j| usize::from(j == i));
                for l in 0..n {
                    let v = a * eval_with(&|j| usize::from(j == i) + usize::from(j == l));
                    jet.second_mut(i, l)[k] = v;
                }
            }
        }
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn normal_sign(&self) -> f64 {
        self.sign
    }
}

/// Torus of revolution about the z axis, tube radius `minor` around a
/// circle of radius `major`.
#[derive(Debug, Clone)]
pub struct Torus {
    pub major: f64,
    pub minor: f64,
}

impl Torus {
    pub fn new(major: f64, minor: f64) -> Result<Self> {
        if !(major > minor && minor > 0.0 && major.is_finite()) {
            return Err(domain(format!(
                "torus needs R > r > 0, got R = {major}, r = {minor}"
            )));
        }
        Ok(Self { major, minor })
    }

    /// Closed-form principal curvatures `(-cos v/(R + r cos v), -1/r)`
    /// for the outward normal.
    pub fn principal_curvatures(&self, v: f64) -> [f64; 2] {
        let c = v.cos();
        [-c / (self.major + self.minor * c), -1.0 / self.minor]
    }
}

impl Immersion for Torus {
    fn dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, TAU), (0.0, TAU)]
    }

    fn eval(&self, u: &[f64], jet: &mut Jet) {
        let (su, cu) = u[0].sin_cos();
        let (sv, cv) = u[1].sin_cos();
        let (big, r) = (self.major, self.minor);
        let w = big + r * cv;
        jet.point.copy_from_slice(&[w * cu, w * su, r * sv]);
        jet.tangent_mut(0).copy_from_slice(&[-w * su, w * cu, 0.0]);
        jet.tangent_mut(1)
            .copy_from_slice(&[-r * sv * cu, -r * sv * su, r * cv]);
        jet.second_mut(0, 0).copy_from_slice(&[-w * cu, -w * su, 0.0]);
        let mixed = [r * sv * su, -r * sv * cu, 0.0];
        jet.second_mut(0, 1).copy_from_slice(&mixed);
        jet.second_mut(1, 0).copy_from_slice(&mixed);
        jet.second_mut(1, 1)
            .copy_from_slice(&[-r * cv * cu, -r * cv * su, -r * sv]);
    }

    fn name(&self) -> String {
        format!("torus(R={}, r={})", self.major, self.minor)
    }
}

/// `F(x) = Σ (x_k - c_k)²/a_k² - 1`.
#[derive(Debug, Clone)]
pub struct EllipsoidFunction {
    pub axes: Vec<f64>,
    pub center: Vec<f64>,
}

impl ImplicitFunction for EllipsoidFunction {
    fn ambient_dim(&self) -> usize {
        self.axes.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.axes)
            .map(|((x, c), a)| (x - c) * (x - c) / (a * a))
            .sum::<f64>()
            - 1.0
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..x.len() {
            out[k] = 2.0 * (x[k] - self.center[k]) / (self.axes[k] * self.axes[k]);
        }
    }

    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        let d = self.axes.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..d {
            out[k * d + k] = 2.0 / (self.axes[k] * self.axes[k]);
        }
    }

    fn name(&self) -> String {
        format!("ellipsoid(n={}, axes={:?})", self.axes.len() - 1, self.axes)
    }
}

pub fn sphere(n: usize, radius: f64, center: Vec<f64>, orientation: Orientation) -> Result<SurfaceSource> {
    if n == 0 {
        return Err(domain("sphere dimension must be >= 1"));
    }
    let imm = ScaledHypersphere::round(n, radius, center)?;
    SurfaceSource::analytic(Arc::new(imm), orientation)
}

pub fn origin_sphere(n: usize, radius: f64, orientation: Orientation) -> Result<SurfaceSource> {
    sphere(n, radius, vec![0.0; n + 1], orientation)
}

/// Ellipsoid centered at the origin as a level set with an axis-scaled
/// hyperspherical parametrization for quadrature.
pub fn ellipsoid(axes: Vec<f64>, orientation: Orientation) -> Result<SurfaceSource> {
    let center = vec![0.0; axes.len()];
    let param = ScaledHypersphere::new(axes.clone(), center.clone())?;
    SurfaceSource::implicit(
        Arc::new(EllipsoidFunction { axes, center }),
        Arc::new(param),
        orientation,
    )
}

pub fn torus(major: f64, minor: f64, orientation: Orientation) -> Result<SurfaceSource> {
    SurfaceSource::analytic(Arc::new(Torus::new(major, minor)?), orientation)
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Subdivided icosahedron with vertices on the sphere of the given radius
/// and center; outward winding. Level k has `10·4^k + 2` vertices.
pub fn icosphere(subdivisions: usize, radius: f64, center: [f64; 3]) -> TriMesh {
    let (mut verts, mut faces) = icosahedron();
    let unit = |p: [f64; 3]| {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / l, p[1] / l, p[2] / l]
    };
    for p in verts.iter_mut() {
        *p = unit(*p);
    }
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|p| {
            [
                center[0] + radius * p[0],
                center[1] + radius * p[1],
                center[2] + radius * p[2],
            ]
        })
        .collect();
    TriMesh::new(
        format!("icosphere(level={subdivisions}, R={radius}, c={center:?})"),
        verts,
        faces,
    )
}

/// Icosphere vertices scaled onto an ellipsoid with semi-axes `axes`.
pub fn ellipsoid_mesh(subdivisions: usize, axes: [f64; 3]) -> TriMesh {
    let mut m = icosphere(subdivisions, 1.0, [0.0; 3]);
    for p in m.vertices.iter_mut() {
        for k in 0..3 {
            p[k] *= axes[k];
        }
    }
    m.name = format!("ellipsoid-mesh(level={subdivisions}, axes={axes:?})");
    m
}

/// Regular `nu × nv` grid triangulation of the torus of revolution.
pub fn torus_mesh(nu: usize, nv: usize, major: f64, minor: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let (su, cu) = (TAU * i as f64 / nu as f64).sin_cos();
        for j in 0..nv {
            let (sv, cv) = (TAU * j as f64 / nv as f64).sin_cos();
            let w = major + minor * cv;
            verts.push([w * cu, w * su, minor * sv]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(
        format!("torus-mesh({nu}x{nv}, R={major}, r={minor})"),
        verts,
        faces,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInfo {
    pub name: String,
    pub description: String,
    pub default: String,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeInfo {
    pub name: String,
    pub description: String,
    pub source_kinds: Vec<SourceKind>,
    pub parameters: Vec<ParameterInfo>,
}

fn param(name: &str, description: &str, default: &str, constraint: &str) -> ParameterInfo {
    ParameterInfo {
        name: name.into(),
        description: description.into(),
        default: default.into(),
        constraint: constraint.into(),
    }
}

/// Built-in generators. Only compact shapes are offered: the integral
/// identities need a closed hypersurface.
pub fn shape_catalog() -> Vec<ShapeInfo> {
    vec![
        ShapeInfo {
            name: "sphere".into(),
            description: "round sphere S^n(R) in R^(n+1); R = sqrt(2n) is the self-shrinker".into(),
            source_kinds: vec![SourceKind::Analytic, SourceKind::Mesh],
            parameters: vec![
                param("radius", "radius R", "1", "R > 0"),
                param("dim", "surface dimension n", "2", "n >= 1 (meshes: n = 2)"),
                param("center", "center, n+1 comma-separated coordinates", "origin", "finite"),
            ],
        },
        ShapeInfo {
            name: "ellipsoid".into(),
            description: "ellipsoid sum x_k^2/a_k^2 = 1 in R^3 or R^4 (level set)".into(),
            source_kinds: vec![SourceKind::Implicit, SourceKind::Mesh],
            parameters: vec![param(
                "axes",
                "semi-axes, 3 (n = 2) or 4 (n = 3) comma-separated values",
                "1,1.5,2",
                "a_k > 0; meshes need 3 axes",
            )],
        },
        ShapeInfo {
            name: "torus".into(),
            description: "torus of revolution in R^3".into(),
            source_kinds: vec![SourceKind::Analytic, SourceKind::Mesh],
            parameters: vec![
                param("R", "major radius", "2", "R > r"),
                param("r", "minor (tube) radius", "0.5", "r > 0"),
            ],
        },
    ]
}
