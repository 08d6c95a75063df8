//! Pointwise curvature algebra.
//!
//! Given a shape operator (or its eigenvalues) this module produces the
//! elementary symmetric functions `S_r`, the normalized r-mean curvatures
//! `H_r = S_r / C(n, r)`, the Newton transformations `P_r` and the
//! pointwise inequalities between them. All functions are pure.
//!
//! `S_r` for `r > n` is zero and the accessors on [`CurvatureProfile`]
//! return zero there, so expressions that reach past the top order
//! (`S_{r+2}` at `r = n - 1`) need no special casing by callers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{symmetric_eigenvalues, Square};

/// Inputs whose asymmetry exceeds this (relative to max(1, max|a_ij|)) are
/// rejected rather than symmetrized.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-10;

/// Principal curvatures at a point, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalCurvatures(Vec<f64>);

impl PrincipalCurvatures {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("principal curvatures need dimension n >= 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite principal curvature".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self(values))
    }

    /// Eigenvalues of a (symmetrized) shape operator.
    pub fn from_shape_operator(a: &Square) -> Result<Self> {
        let sym = symmetrize(a)?;
        Self::new(symmetric_eigenvalues(&sym))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Orientation reversal: every curvature changes sign.
    pub fn negated(&self) -> Self {
        let mut v: Vec<f64> = self.0.iter().map(|k| -k).collect();
        v.sort_by(f64::total_cmp);
        Self(v)
    }
}

/// `C(n, r)` as a float; zero outside `0..=n`.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0;
    for i in 0..r {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// The constant `c_r = (n - r) C(n, r)` with `tr P_r = c_r H_r`.
pub fn trace_constant(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    (n - r) as f64 * binomial(n, r)
}

/// All of `e_0..e_n` in one pass of `e_r^{(k)} = e_r^{(k-1)} + κ_k e_{r-1}^{(k-1)}`.
pub fn elementary_symmetric_all(kappas: &[f64]) -> Vec<f64> {
    let n = kappas.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (k, &kappa) in kappas.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            e[r] += kappa * e[r - 1];
        }
    }
    e
}

/// `S_r = e_r(κ_1, …, κ_n)`.
pub fn elementary_symmetric(kappas: &PrincipalCurvatures, r: usize) -> Result<f64> {
    let n = kappas.dim();
    if r > n {
        return Err(domain(format!("order r = {r} outside 0..={n}")));
    }
    Ok(elementary_symmetric_all(kappas.values())[r])
}

/// Everything the integral checks and classifiers need at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    /// `S_0..S_n`.
    pub s: Vec<f64>,
    /// `H_0..H_n`.
    pub h: Vec<f64>,
    /// `|A|² = Σ κ_i²`.
    pub norm_sq_a: f64,
    /// `tr A³ = Σ κ_i³`.
    pub trace_a3: f64,
    /// Non-normalized mean curvature `S_1 = n H_1`.
    pub big_h: f64,
}

impl CurvatureProfile {
    pub fn dim(&self) -> usize {
        self.s.len() - 1
    }

    /// `S_r`, zero for `r > n`.
    pub fn s(&self, r: usize) -> f64 {
        self.s.get(r).copied().unwrap_or(0.0)
    }

    /// `H_r`, zero for `r > n`.
    pub fn h(&self, r: usize) -> f64 {
        self.h.get(r).copied().unwrap_or(0.0)
    }
}

pub fn curvature_profile(kappas: &PrincipalCurvatures) -> CurvatureProfile {
    profile_from_values(kappas.values())
}

/// Same as [`curvature_profile`] on a raw (not necessarily sorted) slice.
pub fn profile_from_values(kappas: &[f64]) -> CurvatureProfile {
    let n = kappas.len();
    let s = elementary_symmetric_all(kappas);
    let h = s
        .iter()
        .enumerate()
        .map(|(r, sr)| sr / binomial(n, r))
        .collect();
    CurvatureProfile {
        norm_sq_a: kappas.iter().map(|k| k * k).sum(),
        trace_a3: kappas.iter().map(|k| k * k * k).sum(),
        big_h: s[1],
        s,
        h,
    }
}

/// Symmetrizes `(A + Aᵀ)/2`, rejecting inputs whose asymmetry exceeds
/// [`ASYMMETRY_TOLERANCE`].
pub fn symmetrize(a: &Square) -> Result<Square> {
    if !a.is_finite() {
        return Err(Error::Data("shape operator has non-finite entries".into()));
    }
    let scale = a.max_abs().max(1.0);
    let asym = a.asymmetry();
    if asym > ASYMMETRY_TOLERANCE * scale {
        return Err(Error::Data(format!(
            "shape operator asymmetry {asym:e} exceeds {:e}",
            ASYMMETRY_TOLERANCE * scale
        )));
    }
    Ok(a.symmetrized())
}

/// Newton transformations `P_0..P_{n-1}` with their traces and least
/// eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonFamily {
    pub p: Vec<Square>,
    pub traces: Vec<f64>,
    pub min_eigen: Vec<f64>,
}

/// Builds `P_0 = I`, `P_r = S_r I - A P_{r-1}` with `S_r` taken from the
/// eigenvalues of `A`.
pub fn newton_family(a: &Square) -> Result<NewtonFamily> {
    let a = symmetrize(a)?;
    let n = a.dim();
    if n == 0 {
        return Err(domain("empty shape operator"));
    }
    let s = elementary_symmetric_all(&symmetric_eigenvalues(&a));
    Ok(newton_family_with(&a, &s))
}

/// Recursion with caller-supplied `S_0..S_n`; `a` must already be symmetric.
pub(crate) fn newton_family_with(a: &Square, s: &[f64]) -> NewtonFamily {
    let n = a.dim();
    let mut p = Vec::with_capacity(n);
    p.push(Square::identity(n));
    for r in 1..n {
        let next = Square::scaled_identity(n, s[r]).sub(&a.mul(&p[r - 1]));
        // exact arithmetic gives a symmetric polynomial in A; restore that
        p.push(next.symmetrized());
    }
    let traces = p.iter().map(Square::trace).collect();
    let min_eigen = p
        .iter()
        .map(|m| symmetric_eigenvalues(m)[0])
        .collect();
    NewtonFamily { p, traces, min_eigen }
}

/// Only the matrix `P_r`, for callers that do not need the whole family.
pub fn newton_matrix(a: &Square, s: &[f64], r: usize) -> Square {
    let n = a.dim();
    let mut p = Square::identity(n);
    for k in 1..=r {
        p = Square::scaled_identity(n, s[k]).sub(&a.mul(&p));
    }
    p.symmetrized()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GardingEntry {
    pub index: usize,
    pub h: f64,
    /// `H_1 H_{i+1} - H_{i+2}`.
    pub gap: f64,
}

/// `H_i` and `H_1 H_{i+1} - H_{i+2}` for every `1 ≤ i ≤ r`, `1 ≤ r ≤ n-2`.
pub fn garding_audit(profile: &CurvatureProfile, r: usize) -> Result<Vec<GardingEntry>> {
    let n = profile.dim();
    if r < 1 || r + 2 > n {
        return Err(domain(format!(
            "garding audit needs 1 <= r <= n-2, got r = {r}, n = {n}"
        )));
    }
    Ok((1..=r)
        .map(|i| GardingEntry {
            index: i,
            h: profile.h(i),
            gap: profile.h(1) * profile.h(i + 1) - profile.h(i + 2),
        })
        .collect())
}

/// `H_r² - H_{r-1} H_{r+1}`, nonnegative for real curvatures.
pub fn newton_inequality_gap(profile: &CurvatureProfile, r: usize) -> Result<f64> {
    let n = profile.dim();
    if r < 1 || r + 1 > n {
        return Err(domain(format!(
            "newton inequality needs 1 <= r <= n-1, got r = {r}, n = {n}"
        )));
    }
    Ok(profile.h(r) * profile.h(r) - profile.h(r - 1) * profile.h(r + 1))
}

/// `max_i |κ_i - mean(κ)|`; zero exactly at umbilical points.
pub fn umbilicity_deviation(kappas: &PrincipalCurvatures) -> f64 {
    deviation_from_values(kappas.values())
}

pub(crate) fn deviation_from_values(kappas: &[f64]) -> f64 {
    if kappas.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    kappas.iter().fold(0.0, |m, k| f64::max(m, (k - mean).abs()))
}
