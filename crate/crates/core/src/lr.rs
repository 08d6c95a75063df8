//! The operators `L_r(u) = div(P_r ∇u) = tr(P_r ∇²u)`: a weak-form
//! (Galerkin) discretization on triangle meshes and a strong-form
//! evaluation on parametrized samples.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernel::newton_matrix;
use crate::linalg::{cross3, dot, Square};
use crate::report::CheckReport;
use crate::tolerances::Tolerances;
use crate::surface::fields::{ambient_hessians, grid_field_hessians};
use crate::surface::{AmbientFunction, SampleSet, ScalarField};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in input order, so the result depends only
    /// on the order of `triplets`.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// `max |K_ij - K_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Matrix Market coordinate format, general real, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.dim, self.dim, self.nnz());
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
            }
        }
        s
    }
}

/// Discrete `L_r` on a mesh: `stiffness[i][j] = -Σ_faces area ⟨P_r ∇φ_i, ∇φ_j⟩`
/// for piecewise-linear hat functions `φ`, with lumped vertex masses.
#[derive(Debug, Clone)]
pub struct WeakOperator {
    pub r: usize,
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    /// Least eigenvalue of `P_r` over all vertices.
    pub min_vertex_eigen: f64,
}

/// Minimal rotation taking unit vector `a` to unit vector `b`.
fn rotation_between(a: &[f64], b: &[f64]) -> [[f64; 3]; 3] {
    let v = cross3(a, b);
    let c = dot(a, b);
    let k = 1.0 / (1.0 + c);
    let vx = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let vx2: f64 = (0..3).map(|m| vx[i][m] * vx[m][j]).sum();
            r[i][j] = if i == j { 1.0 } else { 0.0 } + vx[i][j] + k * vx2;
        }
    }
    r
}

/// `E P Eᵀ` for the vertex frame `E` (3×2) and a 2×2 matrix `P`.
fn ambient_tensor(set: &SampleSet, i: usize, p: &Square) -> [[f64; 3]; 3] {
    let e = [set.frame_vector(i, 0), set.frame_vector(i, 1)];
    let mut t = [[0.0; 3]; 3];
    for (k, row) in t.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| e[a][k] * p.get(a, b) * e[b][l])
                .sum();
        }
    }
    t
}

/// Assembles the weak `L_r` on a mesh-backed sample set. Each face uses
/// the average of its three vertex `P_r`, each rotated from the vertex
/// tangent plane into the face plane.
pub fn assemble(set: &SampleSet, r: usize) -> Result<WeakOperator> {
    let mesh = set
        .mesh()
        .ok_or_else(|| domain("the weak L_r operator needs a mesh sample set"))?;
    let n = set.dim();
    if r >= n {
        return Err(domain(format!("L_r needs 0 <= r <= n-1 = {}, got r = {r}", n - 1)));
    }
    let c = set.curvatures();
    let sign = set.orientation().sign();
    let vertex_p: Vec<Square> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let s: Vec<f64> = (0..=n).map(|k| c.s(i, k)).collect();
            newton_matrix(&set.shape_op(i), &s, r)
        })
        .collect();
    let min_vertex_eigen = (0..set.len())
        .filter(|&i| !set.is_flagged(i))
        .map(|i| crate::linalg::symmetric_eigenvalues(&vertex_p[i])[0])
        .fold(f64::INFINITY, f64::min);
    let local: Vec<[[f64; 3]; 3]> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|f| {
            let tri = mesh.triangles[f];
            let cross = mesh.triangle_cross(f);
            let twice_area = dot(&cross, &cross).sqrt();
            let nf = [cross[0] / twice_area, cross[1] / twice_area, cross[2] / twice_area];
            let mut p = [[0.0; 3]; 3];
            for &v in &tri {
                // winding-side vertex normal, independent of the orientation flag
                let nv: Vec<f64> = set.normal(v).iter().map(|x| sign * x).collect();
                let rot = rotation_between(&nv, &nf);
                let t = ambient_tensor(set, v, &vertex_p[v]);
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = 0.0;
                        for k in 0..3 {
                            for l in 0..3 {
                                acc += rot[i][k] * t[k][l] * rot[j][l];
                            }
                        }
                        p[i][j] += acc / 3.0;
                    }
                }
            }
            let grads: Vec<[f64; 3]> = (0..3)
                .map(|a| {
                    let (j, k) = (tri[(a + 1) % 3], tri[(a + 2) % 3]);
                    let (xj, xk) = (mesh.vertices[j], mesh.vertices[k]);
                    let edge = [xk[0] - xj[0], xk[1] - xj[1], xk[2] - xj[2]];
                    let g = cross3(&nf, &edge);
                    [g[0] / twice_area, g[1] / twice_area, g[2] / twice_area]
                })
                .collect();
            let area = 0.5 * twice_area;
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in a..3 {
                    let mut q = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            q += grads[a][i] * 0.5 * (p[i][j] + p[j][i]) * grads[b][j];
                        }
                    }
                    k[a][b] = -area * q;
                    k[b][a] = k[a][b];
                }
            }
            k
        })
        .collect();
    let mut triplets = Vec::with_capacity(9 * local.len());
    for (f, k) in local.iter().enumerate() {
        let tri = mesh.triangles[f];
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], k[a][b]));
            }
        }
    }
    Ok(WeakOperator {
        r,
        stiffness: CsrMatrix::from_triplets(set.len(), triplets),
        mass: set.weights().to_vec(),
        min_vertex_eigen,
    })
}

impl WeakOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if u.len() != self.dim() {
            return Err(domain(format!(
                "field '{}' has {} values, operator has {} vertices",
                u.name,
                u.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Mass-lumped strong values `(K u)_i / m_i`.
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        let ku = self.stiffness.mul_vec(&u.values);
        Ok(ScalarField::new(
            format!("L_{}({})", self.r, u.name),
            ku.iter().zip(&self.mass).map(|(k, m)| k / m).collect(),
        ))
    }

    /// `uᵀ K v`, the discrete `∫ u L_r(v) dM`.
    pub fn pairing(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let kv = self.stiffness.mul_vec(&v.values);
        let terms: Vec<f64> = u.values.iter().zip(&kv).map(|(a, b)| a * b).collect();
        Ok(crate::quadrature::pairwise_sum(&terms))
    }

    /// The discrete divergence theorem: `K` symmetric and `K·1 = 0`,
    /// both relative to `max |K|`.
    pub fn divergence_checks(&self, tol: &Tolerances) -> [CheckReport; 2] {
        let k = &self.stiffness;
        let scale = k.max_abs();
        let row = (0..self.dim()).map(|i| k.row_sum(i).abs()).fold(0.0, f64::max);
        let n = self.dim();
        [
            CheckReport::evaluate(format!("stiffness-symmetry[r={}]", self.r), k.max_asymmetry(), scale, tol.symmetry, n, 0)
                .with("r", self.r),
            CheckReport::evaluate(format!("stiffness-row-sum[r={}]", self.r), row, scale, tol.row_sum, n, 0)
                .with("r", self.r),
        ]
    }

    pub fn write_matrix_market(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.stiffness.to_matrix_market().as_bytes())?;
        Ok(())
    }

    /// Smallest and second-smallest eigenvalues of `-K` by power iteration
    /// on `σI + K`, the second with constants deflated. Returns `None` if
    /// either iteration fails to settle within `max_iter` steps.
    pub fn lowest_eigenvalues(&self, max_iter: usize) -> Option<(f64, f64)> {
        let v = self.dim();
        let k = &self.stiffness;
        // Gershgorin bound on the spectrum of -K
        let sigma = (0..v)
            .map(|i| k.row(i).map(|(_, x)| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            * 1.01;
        let shifted = |x: &[f64]| -> Vec<f64> {
            let kx = k.mul_vec(x);
            x.iter().zip(&kx).map(|(a, b)| sigma * a + b).collect()
        };
        let deflate = |x: &mut [f64]| {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            x.iter_mut().for_each(|a| *a -= mean);
        };
        let run = |deflated: bool| -> Option<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b_3c4d);
            let mut x: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if deflated {
                deflate(&mut x);
            }
            let mut mu_prev = f64::NAN;
            for _ in 0..max_iter {
                let l = dot(&x, &x).sqrt();
                x.iter_mut().for_each(|a| *a /= l);
                let mut y = shifted(&x);
                if deflated {
                    deflate(&mut y);
                }
                let mu = dot(&x, &y);
                x = y;
                if (mu - mu_prev).abs() <= 1e-15 * sigma {
                    return Some(sigma - mu);
                }
                mu_prev = mu;
            }
            None
        };
        Some((run(false)?, run(true)?))
    }
}

/// A function to which `L_r` is applied in strong form.
pub enum LrField<'a> {
    /// Grid values, differentiated spectrally in the parameters.
    Samples(&'a ScalarField),
    /// An ambient function with exact derivatives.
    Ambient(&'a dyn AmbientFunction),
}

/// `tr(P_r ∇²u)` per sample on a parametrized sample set.
pub fn strong_lr_analytic(set: &SampleSet, r: usize, u: LrField<'_>) -> Result<ScalarField> {
    let n = set.dim();
    if r >= n {
        return Err(domain(format!("L_r needs 0 <= r <= n-1 = {}, got r = {r}", n - 1)));
    }
    let (hess, name) = match u {
        LrField::Samples(f) => {
            f.check_aligned(set)?;
            if set.grid().is_none() {
                return Err(domain("strong L_r of sampled values needs an analytic or implicit sample set"));
            }
            (grid_field_hessians(set, &f.values)?, f.name.clone())
        }
        LrField::Ambient(f) => (ambient_hessians(set, f), f.name()),
    };
    let c = set.curvatures();
    let values = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let s: Vec<f64> = (0..=n).map(|k| c.s(i, k)).collect();
            let p = newton_matrix(&set.shape_op(i), &s, r);
            let h = &hess[i * n * n..(i + 1) * n * n];
            (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| p.get(a, b) * h[b * n + a])
                .sum()
        })
        .collect();
    Ok(ScalarField::new(format!("L_{r}({name})"), values))
}

/// `L_r` applied to sample values: weak form on meshes, strong form on
/// parametrized sets.
pub fn apply_lr(set: &SampleSet, r: usize, u: &ScalarField) -> Result<ScalarField> {
    if set.mesh().is_some() {
        assemble(set, r)?.apply(u)
    } else if set.grid().is_some() {
        strong_lr_analytic(set, r, LrField::Samples(u))
    } else {
        Err(Error::Domain("L_r needs a mesh or parametrized sample set".into()))
    }
}
