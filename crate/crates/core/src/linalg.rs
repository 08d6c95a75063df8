//! Small dense linear algebra on row-major slices.
//!
//! Everything here works on matrices of size at most a handful (shape
//! operators of hypersurfaces with n ≤ 8), so plain loops beat any
//! allocation-heavy abstraction in the per-sample hot paths.

use serde::{Deserialize, Serialize};

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must hold n*n entries");
        Self { n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { n, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul(&self, other: &Square) -> Square {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = Square::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Square {
        let n = self.n;
        let mut out = Square::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Square {
        Square {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Square) -> Square {
        Square {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn symmetrized(&self) -> Square {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations. Eigenvector `k` is column `k` of the returned row-major
/// matrix.
pub fn symmetric_eigen(m: &Square) -> (Vec<f64>, Square) {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = Square::identity(n).data;
    let frob2: f64 = a.iter().map(|x| x * x).sum();

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off == 0.0 || off <= 1e-34 * frob2 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let nrp = c * arp - s * arq;
                        let nrq = s * arp + c * arq;
                        a[r * n + p] = nrp;
                        a[p * n + r] = nrp;
                        a[r * n + q] = nrq;
                        a[q * n + r] = nrq;
                    }
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = Square::zeros(n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, k, v[r * n + i]);
        }
    }
    (values, vecs)
}

pub fn symmetric_eigenvalues(m: &Square) -> Vec<f64> {
    symmetric_eigen(m).0
}

/// Modified Gram–Schmidt on `k` column vectors of length `dim`, stored
/// contiguously (`cols[j*dim..(j+1)*dim]` is column j). Returns the
/// orthonormal columns (same layout) and the upper-triangular `R`
/// (row-major k×k) with `cols = Q R`, or `None` if a column is dependent
/// on its predecessors below `tol` relative to its own length.
pub fn gram_schmidt(cols: &[f64], dim: usize, k: usize, tol: f64) -> Option<(Vec<f64>, Square)> {
    let mut q = cols.to_vec();
    let mut r = Square::zeros(k);
    for j in 0..k {
        let original = norm(&cols[j * dim..(j + 1) * dim]);
        for i in 0..j {
            let (head, tail) = q.split_at_mut(j * dim);
            let qi = &head[i * dim..(i + 1) * dim];
            let qj = &mut tail[..dim];
            let c = dot(qi, qj);
            r.set(i, j, c);
            for (x, y) in qj.iter_mut().zip(qi) {
                *x -= c * y;
            }
        }
        let qj = &mut q[j * dim..(j + 1) * dim];
        let len = norm(qj);
        if !(len > tol * original.max(f64::MIN_POSITIVE)) {
            return None;
        }
        for x in qj.iter_mut() {
            *x /= len;
        }
        r.set(j, j, len);
    }
    Some((q, r))
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular system.
pub fn solve(m: &Square, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut x = b.to_vec();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            x.swap(pivot, col);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            x[row] -= f * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

/// Inverse via column-wise solves.
pub fn inverse(m: &Square) -> Option<Square> {
    let n = m.dim();
    let mut out = Square::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve(m, &e)?;
        for i in 0..n {
            out.set(i, j, col[i]);
        }
    }
    Some(out)
}

pub fn determinant(m: &Square) -> f64 {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
        }
    }
    det
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let m = Square::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!((vals[1] - 3.0).abs() < 1e-15);
        let v0 = [vecs.get(0, 0), vecs.get(1, 0)];
        assert!((v0[0] + v0[1]).abs() < 1e-15);
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let n = 5;
        let mut m = Square::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = ((i * 7 + j * 3) as f64).sin();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let (vals, vecs) = symmetric_eigen(&m);
        let rebuilt = vecs.mul(&Square::diagonal(&vals)).mul(&vecs.transpose());
        assert!(rebuilt.sub(&m).max_abs() < 1e-13);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn gram_schmidt_rejects_dependent_columns() {
        let cols = [1.0, 0.0, 0.0, 2.0, 0.0, 0.0];
        assert!(gram_schmidt(&cols, 3, 2, 1e-12).is_none());
        let cols = [1.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        let (q, r) = gram_schmidt(&cols, 3, 2, 1e-12).unwrap();
        assert!(dot(&q[0..3], &q[3..6]).abs() < 1e-15);
        assert!((r.get(0, 0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn solve_and_determinant_agree() {
        let m = Square::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 2.0]]);
        let x = solve(&m, &[1.0, 2.0, 3.0]).unwrap();
        let back: Vec<f64> = (0..3).map(|i| dot(&m.as_slice()[i * 3..i * 3 + 3], &x)).collect();
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-14);
        }
        assert!((determinant(&m) - 18.0).abs() < 1e-12);
        assert!(solve(&Square::zeros(2), &[1.0, 1.0]).is_none());
    }
}
