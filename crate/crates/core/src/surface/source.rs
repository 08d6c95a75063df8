use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::{MeshStats, TriMesh};
use crate::error::{Error, Result};
use crate::linalg::norm;

/// Which side the unit normal points to. For built-in closed shapes
/// `Outward` is the exterior side; for user immersions it is the
/// positively oriented complement of the parameter tangents, and for
/// meshes it is the given winding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Outward,
    Inward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outward => 1.0,
            Orientation::Inward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Outward => Orientation::Inward,
            Orientation::Inward => Orientation::Outward,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Outward => "outward",
            Orientation::Inward => "inward",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Analytic,
    Implicit,
    Mesh,
}

impl SourceKind {
    /// Analytic and implicit sources are sampled with spectral accuracy;
    /// meshes are not.
    pub fn is_smooth(self) -> bool {
        !matches!(self, SourceKind::Mesh)
    }
}

/// Value, first and second parameter derivatives of an immersion
/// `x: U ⊂ Rⁿ → Rⁿ⁺¹` at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    n: usize,
    pub point: Vec<f64>,
    /// Column `i` (= ∂_i x) at `[i*(n+1)..(i+1)*(n+1)]`.
    pub jacobian: Vec<f64>,
    /// `∂_i ∂_j x` at `[(i*n+j)*(n+1)..]`.
    pub hessian: Vec<f64>,
}

impl Jet {
    pub fn new(n: usize) -> Self {
        let d = n + 1;
        Self {
            n,
            point: vec![0.0; d],
            jacobian: vec![0.0; n * d],
            hessian: vec![0.0; n * n * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        let d = self.n + 1;
        &self.jacobian[i * d..(i + 1) * d]
    }

    pub fn tangent_mut(&mut self, i: usize) -> &mut [f64] {
        let d = self.n + 1;
        &mut self.jacobian[i * d..(i + 1) * d]
    }

    pub fn second(&self, i: usize, j: usize) -> &[f64] {
        let d = self.n + 1;
        let k = (i * self.n + j) * d;
        &self.hessian[k..k + d]
    }

    pub fn second_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let d = self.n + 1;
        let k = (i * self.n + j) * d;
        &mut self.hessian[k..k + d]
    }
}

/// A parametrized hypersurface with first and second derivatives.
pub trait Immersion: Send + Sync {
    /// Surface dimension n; the ambient space is Rⁿ⁺¹.
    fn dim(&self) -> usize;
    /// Parameter box, one `(lo, hi)` per axis.
    fn domain(&self) -> Vec<(f64, f64)>;
    /// Fills `jet` at parameter point `u`.
    fn eval(&self, u: &[f64], jet: &mut Jet);
    fn name(&self) -> String;
    /// `-1` when the positively oriented complement of the tangents is the
    /// interior side and should be flipped to make `Outward` exterior.
    fn normal_sign(&self) -> f64 {
        1.0
    }
}

/// A level set `{F = 0}` in Rⁿ⁺¹ with `F < 0` inside.
pub trait ImplicitFunction: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `(n+1)×(n+1)`.
    fn hessian(&self, x: &[f64], out: &mut [f64]);
    fn name(&self) -> String;
}

#[derive(Clone)]
pub enum SurfaceSource {
    Analytic {
        immersion: Arc<dyn Immersion>,
        orientation: Orientation,
    },
    Implicit {
        function: Arc<dyn ImplicitFunction>,
        parametrization: Arc<dyn Immersion>,
        orientation: Orientation,
    },
    Mesh {
        mesh: Arc<TriMesh>,
        stats: MeshStats,
        orientation: Orientation,
    },
}

impl fmt::Debug for SurfaceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceSource")
            .field("kind", &self.kind())
            .field("id", &self.id())
            .field("orientation", &self.orientation())
            .finish()
    }
}

const PROBES: usize = 8;
const PROBE_SEED: u64 = 0x5eed_cafe;
const DERIVATIVE_TOLERANCE: f64 = 1e-5;

impl SurfaceSource {
    /// Wraps an immersion after checking its derivative callbacks against
    /// central differences.
    pub fn analytic(immersion: Arc<dyn Immersion>, orientation: Orientation) -> Result<Self> {
        validate_immersion(immersion.as_ref())?;
        Ok(SurfaceSource::Analytic {
            immersion,
            orientation,
        })
    }

    pub fn implicit(
        function: Arc<dyn ImplicitFunction>,
        parametrization: Arc<dyn Immersion>,
        orientation: Orientation,
    ) -> Result<Self> {
        if function.ambient_dim() != parametrization.dim() + 1 {
            return Err(Error::Domain(format!(
                "implicit function lives in R^{} but the parametrization has dimension {}",
                function.ambient_dim(),
                parametrization.dim()
            )));
        }
        validate_immersion(parametrization.as_ref())?;
        validate_implicit(function.as_ref(), parametrization.as_ref())?;
        Ok(SurfaceSource::Implicit {
            function,
            parametrization,
            orientation,
        })
    }

    /// Checks that the mesh is closed, consistently oriented and free of
    /// degenerate triangles.
    pub fn mesh(mesh: TriMesh, orientation: Orientation) -> Result<Self> {
        let stats = mesh.validate()?;
        Ok(SurfaceSource::Mesh {
            mesh: Arc::new(mesh),
            stats,
            orientation,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SurfaceSource::Analytic { immersion, .. } => immersion.dim(),
            SurfaceSource::Implicit {
                parametrization, ..
            } => parametrization.dim(),
            SurfaceSource::Mesh { .. } => 2,
        }
    }

    pub fn kind(&self) -> SourceKind {
        match self {
            SurfaceSource::Analytic { .. } => SourceKind::Analytic,
            SurfaceSource::Implicit { .. } => SourceKind::Implicit,
            SurfaceSource::Mesh { .. } => SourceKind::Mesh,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            SurfaceSource::Analytic { orientation, .. }
            | SurfaceSource::Implicit { orientation, .. }
            | SurfaceSource::Mesh { orientation, .. } => *orientation,
        }
    }

    pub fn with_orientation(&self, orientation: Orientation) -> Self {
        let mut out = self.clone();
        match &mut out {
            SurfaceSource::Analytic { orientation: o, .. }
            | SurfaceSource::Implicit { orientation: o, .. }
            | SurfaceSource::Mesh { orientation: o, .. } => *o = orientation,
        }
        out
    }

    pub fn id(&self) -> String {
        match self {
            SurfaceSource::Analytic { immersion, .. } => immersion.name(),
            SurfaceSource::Implicit { function, .. } => function.name(),
            SurfaceSource::Mesh { mesh, .. } => mesh.name.clone(),
        }
    }

    pub fn mesh_stats(&self) -> Option<&MeshStats> {
        match self {
            SurfaceSource::Mesh { stats, .. } => Some(stats),
            _ => None,
        }
    }
}

fn probe_points(domain: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..PROBES)
        .map(|_| {
            domain
                .iter()
                .map(|&(lo, hi)| {
                    let margin = 0.05 * (hi - lo);
                    rng.gen_range((lo + margin)..(hi - margin))
                })
                .collect()
        })
        .collect()
}

fn steps(domain: &[(f64, f64)]) -> Vec<f64> {
    domain.iter().map(|&(lo, hi)| 1e-5 * (hi - lo)).collect()
}

fn close(fd: &[f64], exact: &[f64]) -> bool {
    let diff = fd
        .iter()
        .zip(exact)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = exact.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    diff <= DERIVATIVE_TOLERANCE * scale
}

fn validate_immersion(imm: &dyn Immersion) -> Result<()> {
    let n = imm.dim();
    if n == 0 {
        return Err(Error::Domain("immersion dimension must be >= 1".into()));
    }
    let domain = imm.domain();
    if domain.len() != n || domain.iter().any(|(lo, hi)| !(hi > lo)) {
        return Err(Error::Domain(format!(
            "{}: parameter domain must be {n} non-empty intervals",
            imm.name()
        )));
    }
    let h = steps(&domain);
    let mut jet = Jet::new(n);
    let mut plus = Jet::new(n);
    let mut minus = Jet::new(n);
    for u in probe_points(&domain) {
        imm.eval(&u, &mut jet);
        for i in 0..n {
            let mut up = u.clone();
            let mut um = u.clone();
            up[i] += h[i];
            um[i] -= h[i];
            imm.eval(&up, &mut plus);
            imm.eval(&um, &mut minus);
            let fd: Vec<f64> = plus
                .point
                .iter()
                .zip(&minus.point)
                .map(|(a, b)| (a - b) / (2.0 * h[i]))
                .collect();
            if !close(&fd, jet.tangent(i)) {
                return Err(Error::Derivative(format!(
                    "{}: first derivative along axis {i} disagrees with central differences at {u:?}",
                    imm.name()
                )));
            }
            for j in 0..n {
                let fd: Vec<f64> = plus
                    .tangent(j)
                    .iter()
                    .zip(minus.tangent(j))
                    .map(|(a, b)| (a - b) / (2.0 * h[i]))
                    .collect();
                if !close(&fd, jet.second(i, j)) {
                    return Err(Error::Derivative(format!(
                        "{}: second derivative ({i},{j}) disagrees with central differences at {u:?}",
                        imm.name()
                    )));
                }
            }
        }
    }
    Ok(())
}

fn validate_implicit(f: &dyn ImplicitFunction, param: &dyn Immersion) -> Result<()> {
    let d = f.ambient_dim();
    let domain = param.domain();
    let mut jet = Jet::new(param.dim());
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let mut gp = vec![0.0; d];
    let mut gm = vec![0.0; d];
    for u in probe_points(&domain) {
        param.eval(&u, &mut jet);
        let x = &jet.point;
        f.gradient(x, &mut grad);
        f.hessian(x, &mut hess);
        let gnorm = norm(&grad);
        let scale = norm(x).max(1.0);
        if f.value(x).abs() > 1e-8 * gnorm.max(1e-300) * scale {
            return Err(Error::Derivative(format!(
                "{}: parametrization leaves the level set at {u:?} (F = {:e})",
                f.name(),
                f.value(x)
            )));
        }
        let h = 1e-5 * scale;
        for k in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            if !close(&[fd], &grad[k..k + 1]) {
                return Err(Error::Derivative(format!(
                    "{}: gradient component {k} disagrees with central differences",
                    f.name()
                )));
            }
            f.gradient(&xp, &mut gp);
            f.gradient(&xm, &mut gm);
            let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            if !close(&fd, &hess[k * d..(k + 1) * d]) {
                return Err(Error::Derivative(format!(
                    "{}: Hessian row {k} disagrees with central differences",
                    f.name()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Circle of radius 1 whose second derivative has the wrong sign.
    struct BrokenCircle;

    impl Immersion for BrokenCircle {
        fn dim(&self) -> usize {
            1
        }
        fn domain(&self) -> Vec<(f64, f64)> {
            vec![(0.0, std::f64::consts::TAU)]
        }
        fn eval(&self, u: &[f64], jet: &mut Jet) {
            let (s, c) = u[0].sin_cos();
            jet.point.copy_from_slice(&[c, s]);
            jet.tangent_mut(0).copy_from_slice(&[-s, c]);
            jet.second_mut(0, 0).copy_from_slice(&[c, s]);
        }
        fn name(&self) -> String {
            "broken-circle".into()
        }
    }

    #[test]
    fn wrong_second_derivative_is_caught() {
        let err = SurfaceSource::analytic(Arc::new(BrokenCircle), Orientation::Outward).unwrap_err();
        assert!(matches!(err, Error::Derivative(msg) if msg.contains("second derivative")));
    }

    #[test]
    fn orientation_helpers() {
        assert_eq!(Orientation::Outward.sign(), 1.0);
        assert_eq!(Orientation::Inward.reversed(), Orientation::Outward);
        assert_eq!(Orientation::Inward.to_string(), "inward");
    }
}
