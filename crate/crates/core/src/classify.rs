//! Verdicts for round spheres, self-shrinkers and λ-hypersurfaces, the
//! hypothesis audits of the rigidity theorems, and their residuals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::integral::integrate_values;
use crate::kernel::{binomial, deviation_from_values};
use crate::linalg::norm;
use crate::lr::apply_lr;
use crate::report::{CheckReport, MetaValue};
use crate::surface::{Orientation, SampleSet, ScalarField};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictLabel {
    RoundSphere,
    SelfShrinker,
    LambdaHypersurface,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Which classifier produced the verdict.
    pub classifier: String,
    pub label: VerdictLabel,
    pub params: BTreeMap<String, MetaValue>,
    /// Area-normalized `(∫ r² dM / |M|)^{1/2}`.
    pub residual_l2: f64,
    pub residual_inf: f64,
    pub tolerance_used: f64,
    pub orientation_used: Option<Orientation>,
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        self.label != VerdictLabel::None
    }
}

/// Per-sample `H + ρ/2 - λ` in the stored orientation.
fn lambda_residual(set: &SampleSet, lambda: f64) -> Vec<f64> {
    let c = set.curvatures();
    (0..set.len())
        .into_par_iter()
        .map(|i| c.big_h(i) + 0.5 * set.support(i) - lambda)
        .collect()
}

fn linf(set: &SampleSet, values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| !set.is_flagged(*i))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

fn l2(set: &SampleSet, values: &[f64]) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    (integrate_values(set, &sq) / set.total_area()).sqrt()
}

fn mean(set: &SampleSet, values: &[f64]) -> f64 {
    integrate_values(set, values) / set.total_area()
}

/// L∞ of `H + ρ/2 - λ` in the stored and in the reversed orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGate {
    pub same_orientation_inf: f64,
    pub reversed_inf: f64,
}

pub fn lambda_gate(set: &SampleSet, lambda: f64) -> LambdaGate {
    // reversing N negates H and ρ: the residual becomes -(H + ρ/2) - λ
    let c = set.curvatures();
    let (same, rev): (Vec<f64>, Vec<f64>) = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let v = c.big_h(i) + 0.5 * set.support(i);
            (v - lambda, -v - lambda)
        })
        .unzip();
    LambdaGate {
        same_orientation_inf: linf(set, &same),
        reversed_inf: linf(set, &rev),
    }
}

/// Picks an orientation: if both satisfy the tolerance, the one with
/// nonnegative mean `H`; otherwise the smaller residual.
fn pick_orientation(set: &SampleSet, same: f64, reversed: f64, tol: f64) -> bool {
    if same <= tol && reversed <= tol {
        let h: Vec<f64> = set.curvatures().s_values(1);
        mean(set, &h) >= 0.0
    } else {
        same <= reversed
    }
}

/// `H + ρ/2` in the better orientation, with the self-shrinker verdict.
pub fn selfshrinker_residual(set: &SampleSet, tol: &Tolerances) -> (ScalarField, Verdict) {
    let gate = lambda_gate(set, 0.0);
    let keep = pick_orientation(set, gate.same_orientation_inf, gate.reversed_inf, tol.self_shrinker);
    let mut values = lambda_residual(set, 0.0);
    let orientation = if keep {
        set.orientation()
    } else {
        values.iter_mut().for_each(|v| *v = -*v);
        set.orientation().reversed()
    };
    let inf = linf(set, &values);
    let verdict = Verdict {
        classifier: "self-shrinker".into(),
        label: if inf <= tol.self_shrinker {
            VerdictLabel::SelfShrinker
        } else {
            VerdictLabel::None
        },
        params: BTreeMap::new(),
        residual_l2: l2(set, &values),
        residual_inf: inf,
        tolerance_used: tol.self_shrinker,
        orientation_used: Some(orientation),
    };
    (ScalarField::new("H + rho/2", values), verdict)
}

/// Fits `λ̂ = mean(H + ρ/2)` and reports the spread of `H + ρ/2 - λ̂`.
/// The spread is the same in both orientations; the reported orientation
/// is the one with nonnegative mean `H`.
pub fn lambda_fit(set: &SampleSet, tol: &Tolerances) -> Verdict {
    let raw = lambda_residual(set, 0.0);
    let lambda_same = mean(set, &raw);
    let h = set.curvatures().s_values(1);
    let keep = mean(set, &h) >= 0.0;
    let (lambda, orientation) = if keep {
        (lambda_same, set.orientation())
    } else {
        (-lambda_same, set.orientation().reversed())
    };
    let values: Vec<f64> = raw.iter().map(|v| v - lambda_same).collect();
    let inf = linf(set, &values);
    let mut params = BTreeMap::new();
    params.insert("lambda".into(), MetaValue::Real(lambda));
    Verdict {
        classifier: "lambda-fit".into(),
        label: if inf <= tol.self_shrinker {
            VerdictLabel::LambdaHypersurface
        } else {
            VerdictLabel::None
        },
        params,
        residual_l2: l2(set, &values),
        residual_inf: inf,
        tolerance_used: tol.self_shrinker,
        orientation_used: Some(orientation),
    }
}

/// Sphere fit: area-weighted centroid, one fixed-point correction of the
/// center against radial residuals, radius as mean distance. Round sphere
/// if the relative radial deviation and the area-weighted mean of
/// `umbilicity · R̂` are both within tolerance.
pub fn sphere_verdict(set: &SampleSet, tol: &Tolerances) -> Verdict {
    let d = set.dim() + 1;
    let coord_mean = |f: &dyn Fn(usize) -> f64| -> f64 {
        let v: Vec<f64> = (0..set.len()).map(f).collect();
        mean(set, &v)
    };
    let centroid: Vec<f64> = (0..d).map(|k| coord_mean(&|i| set.position(i)[k])).collect();
    let dist = |c: &[f64], i: usize| -> f64 {
        let p = set.position(i);
        norm(&(0..d).map(|k| p[k] - c[k]).collect::<Vec<_>>())
    };
    let r0 = coord_mean(&|i| dist(&centroid, i));
    let center: Vec<f64> = (0..d)
        .map(|k| {
            centroid[k]
                + coord_mean(&|i| {
                    let di = dist(&centroid, i);
                    if di > 0.0 {
                        (di - r0) * (set.position(i)[k] - centroid[k]) / di
                    } else {
                        0.0
                    }
                })
        })
        .collect();
    let radius = coord_mean(&|i| dist(&center, i));
    let radial: Vec<f64> = (0..set.len()).map(|i| (dist(&center, i) - radius) / radius).collect();
    let c = set.curvatures();
    let umbilic: Vec<f64> = (0..set.len())
        .map(|i| if set.is_flagged(i) { 0.0 } else { deviation_from_values(c.kappas(i)) * radius })
        .collect();
    let radial_inf = linf(set, &radial);
    let umbilic_mean = mean(set, &umbilic);
    let inf = radial_inf.max(umbilic_mean);
    let mut params = BTreeMap::new();
    params.insert("radius".into(), MetaValue::Real(radius));
    params.insert("center".into(), MetaValue::Vector(center));
    params.insert("radial_deviation_inf".into(), MetaValue::Real(radial_inf));
    params.insert("umbilicity_mean".into(), MetaValue::Real(umbilic_mean));
    Verdict {
        classifier: "sphere".into(),
        label: if inf <= tol.sphere {
            VerdictLabel::RoundSphere
        } else {
            VerdictLabel::None
        },
        params,
        residual_l2: l2(set, &radial),
        residual_inf: inf,
        tolerance_used: tol.sphere,
        orientation_used: None,
    }
}

/// Raw hypothesis quantities of the rigidity theorems, in the stored
/// orientation. No thresholds are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisAudit {
    pub orientation_used: Orientation,
    pub rho_min: f64,
    /// Least eigenvalue of `P_r` over samples, `r = 0..n-1`.
    pub pr_min_eigen: Vec<f64>,
    /// Area-weighted mean of `H_r`, `r = 0..n`.
    pub hr_mean: Vec<f64>,
    /// Area-weighted variance of `H_r`.
    pub hr_variance: Vec<f64>,
    /// `sqrt(variance) / |mean|` (0 when both vanish).
    pub hr_relative_std: Vec<f64>,
    pub hr_min: Vec<f64>,
    /// Minimum over samples of `H_1 H_{i+1} - H_{i+2}`, `i = 1..n-2`.
    pub garding_gap_min: Vec<f64>,
    /// Minimum over samples of `H_r² - H_{r-1} H_{r+1}`, `r = 1..n-1`.
    pub newton_gap_min: Vec<f64>,
    pub norm_sq_a_max: f64,
    pub big_h_minus_lambda_min: Option<f64>,
}

impl HypothesisAudit {
    /// `H_r` constant within the relative tolerance.
    pub fn hr_constant(&self, r: usize, tol: f64) -> bool {
        self.hr_relative_std.get(r).is_some_and(|s| *s <= tol)
    }
}

pub fn hypothesis_audit(set: &SampleSet, lambda: Option<f64>) -> HypothesisAudit {
    let n = set.dim();
    let c = set.curvatures();
    let live: Vec<usize> = (0..set.len()).filter(|&i| !set.is_flagged(i)).collect();
    let min_over = |f: &(dyn Fn(usize) -> f64 + Sync)| live.iter().map(|&i| f(i)).fold(f64::INFINITY, f64::min);
    let max_over = |f: &(dyn Fn(usize) -> f64 + Sync)| live.iter().map(|&i| f(i)).fold(f64::NEG_INFINITY, f64::max);
    let families: Vec<Vec<f64>> = live
        .par_iter()
        .map(|&i| set.newton_family(i).min_eigen)
        .collect();
    let pr_min_eigen = (0..n)
        .map(|r| families.iter().map(|m| m[r]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut hr_mean = Vec::with_capacity(n + 1);
    let mut hr_variance = Vec::with_capacity(n + 1);
    let mut hr_relative_std = Vec::with_capacity(n + 1);
    let mut hr_min = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let h = c.h_values(r);
        let m = mean(set, &h);
        let dev: Vec<f64> = h.iter().map(|v| (v - m) * (v - m)).collect();
        let var = mean(set, &dev).max(0.0);
        hr_mean.push(m);
        hr_variance.push(var);
        hr_relative_std.push(if var == 0.0 { 0.0 } else { var.sqrt() / m.abs() });
        hr_min.push(min_over(&|i| c.h(i, r)));
    }
    let garding_gap_min = (1..n.saturating_sub(1))
        .map(|k| min_over(&|i| c.h(i, 1) * c.h(i, k + 1) - c.h(i, k + 2)))
        .collect();
    let newton_gap_min = (1..n)
        .map(|r| min_over(&|i| c.h(i, r) * c.h(i, r) - c.h(i, r - 1) * c.h(i, r + 1)))
        .collect();
    HypothesisAudit {
        orientation_used: set.orientation(),
        rho_min: min_over(&|i| set.support(i)),
        pr_min_eigen,
        hr_mean,
        hr_variance,
        hr_relative_std,
        hr_min,
        garding_gap_min,
        newton_gap_min,
        norm_sq_a_max: max_over(&|i| c.norm_sq_a(i)),
        big_h_minus_lambda_min: lambda.map(|l| min_over(&|i| c.big_h(i) - l)),
    }
}

/// Pointwise comparison `L_r(u) = Σ rhs` reported by L∞, normalized by the
/// largest `|L_r u| + Σ |rhs term|`.
fn pointwise_report(name: &str, set: &SampleSet, lhs: &[f64], rhs: &[Vec<f64>], tol: f64) -> CheckReport {
    let diff: Vec<f64> = (0..set.len())
        .map(|i| lhs[i] - rhs[i].iter().sum::<f64>())
        .collect();
    let scale = (0..set.len())
        .filter(|&i| !set.is_flagged(i))
        .map(|i| lhs[i].abs() + rhs[i].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let inf = linf(set, &diff);
    CheckReport::evaluate(name, inf, scale, tol, set.len(), set.flagged_count())
        .with_linf(inf)
        .with("residual_l2", l2(set, &diff))
        .with("n", set.dim())
        .with("orientation", set.orientation().to_string())
}

fn theorem_tolerance(set: &SampleSet, tol: &Tolerances) -> f64 {
    if set.kind().is_smooth() {
        tol.pointwise
    } else {
        tol.fem
    }
}

/// `L_r(H_1) - (1 + H_1 ρ)` for `0 ≤ r ≤ n-1`.
pub fn theorem1_residual(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    let n = set.dim();
    if r >= n {
        return Err(domain(format!("the first theorem residual needs 0 <= r <= n-1, got r = {r}")));
    }
    let c = set.curvatures();
    let h1 = ScalarField::new("H_1", c.h_values(1));
    let lhs = apply_lr(set, r, &h1)?;
    let rhs: Vec<Vec<f64>> = (0..set.len()).map(|i| vec![1.0, c.h(i, 1) * set.support(i)]).collect();
    Ok(pointwise_report(&format!("theorem1[r={r}]"), set, &lhs.values, &rhs, theorem_tolerance(set, tol)).with("r", r))
}

/// `L_r(H_{r+1}) - (H_r + H_{r+1} ρ)` for `0 ≤ r ≤ n-2` (`r = 0` is the
/// same equation as the first residual with `H_0 = 1`).
pub fn theorem2_residual(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    let n = set.dim();
    if r + 2 > n {
        return Err(domain(format!(
            "the second theorem residual needs 0 <= r <= n-2, got r = {r} with n = {n}"
        )));
    }
    let c = set.curvatures();
    let u = ScalarField::new(format!("H_{}", r + 1), c.h_values(r + 1));
    let lhs = apply_lr(set, r, &u)?;
    let rhs: Vec<Vec<f64>> = (0..set.len())
        .map(|i| vec![c.h(i, r), c.h(i, r + 1) * set.support(i)])
        .collect();
    Ok(pointwise_report(&format!("theorem2[r={r}]"), set, &lhs.values, &rhs, theorem_tolerance(set, tol)).with("r", r))
}

/// Both residuals at the same order; `r` must be admissible for both.
pub fn theorem_residuals(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<(CheckReport, CheckReport)> {
    let second = theorem2_residual(set, r, tol)?;
    Ok((theorem1_residual(set, r, tol)?, second))
}

/// `n/R - R/2`, the λ of the round sphere of radius `R` in `Rⁿ⁺¹`.
pub fn sphere_lambda(n: usize, radius: f64) -> f64 {
    n as f64 / radius - radius / 2.0
}

/// `c_r = (n-r) C(n,r)`, re-exported for report metadata.
pub fn trace_constant(n: usize, r: usize) -> f64 {
    (n - r) as f64 * binomial(n, r)
}
