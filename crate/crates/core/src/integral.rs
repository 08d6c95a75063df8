//! Surface integration and the integral identities of closed hypersurfaces.

use rayon::prelude::*;

use crate::classify;
use crate::error::{domain, Result};
use crate::quadrature::pairwise_sum;
use crate::report::CheckReport;
use crate::surface::{tangential_component, tangential_gradient, SampleSet, ScalarField};
use crate::tolerances::Tolerances;

/// `∫ f dM` as a pairwise sum of `weight · value` over unflagged samples.
pub fn integrate(set: &SampleSet, field: &ScalarField) -> Result<f64> {
    field.check_aligned(set)?;
    Ok(integrate_values(set, &field.values))
}

pub(crate) fn integrate_values(set: &SampleSet, values: &[f64]) -> f64 {
    let terms: Vec<f64> = values
        .par_iter()
        .enumerate()
        .map(|(i, v)| if set.is_flagged(i) { 0.0 } else { set.weight(i) * v })
        .collect();
    pairwise_sum(&terms)
}

/// Integrated residual of a per-sample `(value, magnitude)` pair, where
/// `magnitude` is the sum of absolute values of the terms making up
/// `value`. Its integral is the relative normalizer.
pub(crate) fn integral_check(
    name: &str,
    set: &SampleSet,
    tolerance: f64,
    integrand: impl Fn(usize) -> (f64, f64) + Sync + Send,
) -> CheckReport {
    let (values, mags): (Vec<f64>, Vec<f64>) = (0..set.len())
        .into_par_iter()
        .map(|i| if set.is_flagged(i) { (0.0, 0.0) } else { integrand(i) })
        .unzip();
    let integral = integrate_values(set, &values);
    let normalizer = integrate_values(set, &mags);
    let linf = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    CheckReport::evaluate(name, integral.abs(), normalizer, tolerance, set.len(), set.flagged_count())
        .with_linf(linf)
        .with("integral", integral)
        .with("n", set.dim())
        .with("orientation", set.orientation().to_string())
}

fn check_order(set: &SampleSet, r: usize, what: &str) -> Result<()> {
    let n = set.dim();
    if r + 1 > n {
        return Err(domain(format!("{what} needs 0 <= r <= n-1 = {}, got r = {r}", n - 1)));
    }
    Ok(())
}

/// `∫ (H_r + H_{r+1} ρ) dM = 0` for `0 ≤ r ≤ n-1`.
pub fn minkowski_check(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    check_order(set, r, "the Minkowski formula")?;
    let c = set.curvatures();
    let report = integral_check(&format!("minkowski[r={r}]"), set, tol.integral, |i| {
        let a = c.h(i, r);
        let b = c.h(i, r + 1) * set.support(i);
        (a + b, a.abs() + b.abs())
    });
    Ok(report.with("r", r))
}

/// `∫ Δ|x|² dM = ∫ 2n(1 + H_1 ρ) dM = 0`.
pub fn laplacian_x2_check(set: &SampleSet, tol: &Tolerances) -> CheckReport {
    let c = set.curvatures();
    let two_n = 2.0 * set.dim() as f64;
    integral_check("laplacian-x2", set, tol.integral, |i| {
        let b = c.h(i, 1) * set.support(i);
        (two_n * (1.0 + b), two_n * (1.0 + b.abs()))
    })
}

/// Integrated form of
/// `L_r(ρ) = -(r+1)S_{r+1} - (S_1 S_{r+1} - (r+2)S_{r+2})ρ - ⟨∇S_{r+1}, x^T⟩`,
/// whose left side integrates to zero. `S_k = 0` for `k > n`.
pub fn lr_rho_identity_check(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    check_order(set, r, "the L_r(rho) identity")?;
    let rhs = lr_rho_terms(set, r)?;
    let report = integral_check(&format!("lr-rho-identity[r={r}]"), set, tol.lr_identity, |i| {
        let t = &rhs[i];
        (t.iter().sum(), t.iter().map(|v| v.abs()).sum())
    });
    Ok(report.with("r", r))
}

/// Right side of the `L_r(ρ)` identity per sample:
/// `-(r+1)S_{r+1} - (S_1 S_{r+1} - (r+2)S_{r+2})ρ - ⟨∇S_{r+1}, x^T⟩`.
pub fn lr_rho_rhs(set: &SampleSet, r: usize) -> Result<ScalarField> {
    check_order(set, r, "the L_r(rho) identity")?;
    let terms = lr_rho_terms(set, r)?;
    Ok(ScalarField::new(
        format!("L_{r}(rho) rhs"),
        terms.iter().map(|t| t.iter().sum()).collect(),
    ))
}

/// The four terms of the right side of the `L_r(ρ)` identity per sample.
pub(crate) fn lr_rho_terms(set: &SampleSet, r: usize) -> Result<Vec<[f64; 4]>> {
    let c = set.curvatures();
    let s_next = ScalarField::new(format!("S_{}", r + 1), c.s_values(r + 1));
    let grad = tangential_gradient(set, &s_next)?;
    let xt = tangential_component(set);
    let rf = r as f64;
    Ok((0..set.len())
        .into_par_iter()
        .map(|i| {
            let rho = set.support(i);
            let (s1, sr1, sr2) = (c.s(i, 1), c.s(i, r + 1), c.s(i, r + 2));
            [
                -(rf + 1.0) * sr1,
                -s1 * sr1 * rho,
                (rf + 2.0) * sr2 * rho,
                if grad.flagged[i] { 0.0 } else { -grad.dot_at(&xt, i) },
            ]
        })
        .collect())
}

/// `∫ (H_1 H_{r+1} - H_{r+2}) H dM = 0` on self-shrinkers with constant
/// `H_{r+1}`, for `1 ≤ r ≤ n-2`. At `r = n-1` the identity would need a
/// Minkowski formula of order `n` and fails on the round sphere itself,
/// so that order is rejected.
pub fn selfshrinker_weighted_identity(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    let n = set.dim();
    if r == 0 || r + 2 > n {
        return Err(domain(format!(
            "the weighted self-shrinker identity needs 1 <= r <= n-2, got r = {r} with n = {n}"
        )));
    }
    let c = set.curvatures();
    let report = integral_check(&format!("selfshrinker-weighted[r={r}]"), set, tol.integral, |i| {
        let a = c.h(i, 1) * c.h(i, r + 1) * c.big_h(i);
        let b = c.h(i, r + 2) * c.big_h(i);
        (a - b, a.abs() + b.abs())
    })
    .with("r", r);
    let (_, gate) = classify::selfshrinker_residual(set, tol);
    let report = report.with("gate_residual_inf", gate.residual_inf);
    if gate.is_positive() {
        Ok(report)
    } else {
        Ok(report.hypothesis_violated(format!(
            "not a self-shrinker: best-orientation |H + rho/2| reaches {:e}",
            gate.residual_inf
        )))
    }
}

/// `∫ [(n-1)H + 2(H - λ)(|A|² - H²)] dM = 0` on λ-hypersurfaces. The
/// orientation is the one in which `H + ρ/2 = λ` holds.
pub fn lambda_identity_check(set: &SampleSet, lambda: f64, tol: &Tolerances) -> CheckReport {
    let gate = classify::lambda_gate(set, lambda);
    let oriented;
    let used = if gate.same_orientation_inf <= gate.reversed_inf {
        set
    } else {
        oriented = set.reversed();
        &oriented
    };
    let best = gate.same_orientation_inf.min(gate.reversed_inf);
    let c = used.curvatures();
    let n1 = used.dim() as f64 - 1.0;
    let report = integral_check("lambda-identity", used, tol.integral, |i| {
        let h = c.big_h(i);
        let a = n1 * h;
        let b = 2.0 * (h - lambda) * (c.norm_sq_a(i) - h * h);
        (a + b, a.abs() + b.abs())
    })
    .with("lambda", lambda)
    .with("gate_residual_inf", best);
    if best <= tol.self_shrinker {
        report
    } else {
        report.hypothesis_violated(format!(
            "not a lambda-hypersurface for lambda = {lambda}: |H + rho/2 - lambda| reaches {best:e}"
        ))
    }
}

/// Relative L² comparison of operator values against a sum of terms,
/// normalized by `‖ |lhs| + Σ |term| ‖`.
pub(crate) fn l2_comparison(
    name: &str,
    set: &SampleSet,
    lhs: &[f64],
    terms: &[Vec<f64>],
    tolerance: f64,
) -> CheckReport {
    let (diff_sq, mag_sq): (Vec<f64>, Vec<f64>) = (0..set.len())
        .map(|i| {
            let rhs: f64 = terms[i].iter().sum();
            let mag = lhs[i].abs() + terms[i].iter().map(|v| v.abs()).sum::<f64>();
            ((lhs[i] - rhs).powi(2), mag * mag)
        })
        .unzip();
    let linf = (0..set.len())
        .filter(|&i| !set.is_flagged(i))
        .map(|i| diff_sq[i].sqrt())
        .fold(0.0, f64::max);
    let abs = integrate_values(set, &diff_sq).sqrt();
    let normalizer = integrate_values(set, &mag_sq).sqrt();
    CheckReport::evaluate(name, abs, normalizer, tolerance, set.len(), set.flagged_count())
        .with_linf(linf)
        .with("n", set.dim())
        .with("orientation", set.orientation().to_string())
}

/// Mesh operator check of `Δ|x|² = 2n(1 + H_1 ρ)`: the weak `L_0` of
/// `|x|²` against the right side, in relative L².
pub fn laplacian_x2_fem_check(set: &SampleSet, tol: &Tolerances) -> Result<CheckReport> {
    let op = crate::lr::assemble(set, 0)?;
    let u = crate::surface::evaluate(set, &crate::surface::SquaredNorm);
    let lhs = op.apply(&u)?;
    let c = set.curvatures();
    let two_n = 2.0 * set.dim() as f64;
    let terms: Vec<Vec<f64>> = (0..set.len())
        .map(|i| vec![two_n, two_n * c.h(i, 1) * set.support(i)])
        .collect();
    Ok(l2_comparison("laplacian-x2-fem", set, &lhs.values, &terms, tol.fem))
}

/// Pointwise `L_r(ρ)` identity on meshes: the weak `L_r` applied to `ρ`
/// against the right side, in relative L².
pub fn lr_rho_pointwise_check(set: &SampleSet, r: usize, tol: &Tolerances) -> Result<CheckReport> {
    check_order(set, r, "the L_r(rho) identity")?;
    let op = crate::lr::assemble(set, r)?;
    let lhs = op.apply(&crate::surface::support_function(set))?;
    let terms: Vec<Vec<f64>> = lr_rho_terms(set, r)?.iter().map(|t| t.to_vec()).collect();
    Ok(l2_comparison(&format!("lr-rho-pointwise[r={r}]"), set, &lhs.values, &terms, tol.lr_identity)
        .with("r", r)
        .with("min_vertex_eigen", op.min_vertex_eigen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CheckStatus;
    use crate::surface::{sample_analytic, shapes, Orientation};
    use std::f64::consts::PI;

    fn sphere(n: usize, r: f64, o: Orientation, res: usize) -> SampleSet {
        sample_analytic(&shapes::origin_sphere(n, r, o).unwrap(), res).unwrap()
    }

    #[test]
    fn area_and_gauss_bonnet() {
        let t = Tolerances::analytic();
        let s = sphere(2, 1.0, Orientation::Outward, 64);
        let one = ScalarField::constant(&s, 1.0);
        assert!((integrate(&s, &one).unwrap() - 4.0 * PI).abs() < 1e-10);
        let k = ScalarField::new("H2", s.curvatures().h_values(2));
        assert!((integrate(&s, &k).unwrap() - 4.0 * PI).abs() < 1e-9);
        let torus = sample_analytic(&shapes::torus(2.0, 0.5, Orientation::Outward).unwrap(), 64).unwrap();
        let k = ScalarField::new("H2", torus.curvatures().h_values(2));
        assert!(integrate(&torus, &k).unwrap().abs() < 1e-9);
        assert!(minkowski_check(&torus, 2, &t).is_err());
    }

    #[test]
    fn sphere_minkowski_is_pointwise_zero() {
        let t = Tolerances::analytic();
        for o in [Orientation::Outward, Orientation::Inward] {
            let s = sphere(2, 1.0, o, 16);
            let rep = minkowski_check(&s, 0, &t).unwrap();
            assert!(rep.residual_linf.unwrap() < 1e-12);
            assert!(rep.is_pass());
        }
    }

    #[test]
    fn torus_minkowski_and_lr_identity() {
        let t = Tolerances::analytic();
        let torus = sample_analytic(&shapes::torus(2.0, 0.5, Orientation::Outward).unwrap(), 64).unwrap();
        for r in 0..2 {
            let m = minkowski_check(&torus, r, &t).unwrap();
            assert!(m.residual_rel < 1e-8, "{m:?}");
            let l = lr_rho_identity_check(&torus, r, &t).unwrap();
            assert!(l.residual_rel < 1e-6, "{l:?}");
        }
        let lap = laplacian_x2_check(&torus, &t);
        let m0 = minkowski_check(&torus, 0, &t).unwrap();
        let (crate::report::MetaValue::Real(a), crate::report::MetaValue::Real(b)) =
            (&lap.metadata["integral"], &m0.metadata["integral"])
        else {
            panic!()
        };
        assert!((a - 4.0 * b).abs() < 1e-12);
    }

    #[test]
    fn mesh_operator_checks() {
        use crate::surface::{sample_mesh, shapes::icosphere, SurfaceSource};
        let t = Tolerances::mesh();
        let mesh = icosphere(4, 1.0, [0.0; 3]).translated([0.3, -0.2, 0.1]);
        let set = sample_mesh(&SurfaceSource::mesh(mesh, Orientation::Outward).unwrap()).unwrap();
        let rep = laplacian_x2_fem_check(&set, &t).unwrap();
        assert!(rep.is_pass(), "{rep:?}");
        let centered = icosphere(4, 1.0, [0.0; 3]);
        let set = sample_mesh(&SurfaceSource::mesh(centered, Orientation::Inward).unwrap()).unwrap();
        for r in 0..2 {
            let rep = lr_rho_pointwise_check(&set, r, &t).unwrap();
            assert!(rep.is_pass(), "{rep:?}");
        }
    }

    #[test]
    fn weighted_identity_range_and_gate() {
        let t = Tolerances::analytic();
        let s = sphere(3, 6f64.sqrt(), Orientation::Inward, 12);
        let rep = selfshrinker_weighted_identity(&s, 1, &t).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.residual_abs < 1e-10);
        assert!(selfshrinker_weighted_identity(&s, 2, &t).is_err());
        let unit = sphere(3, 1.0, Orientation::Inward, 12);
        let rep = selfshrinker_weighted_identity(&unit, 1, &t).unwrap();
        assert_eq!(rep.status, CheckStatus::HypothesisViolated);
        assert_eq!(rep.passed, None);
    }

    #[test]
    fn lambda_identity_on_spheres() {
        let t = Tolerances::analytic();
        let s = sphere(2, 1.0, Orientation::Outward, 16);
        let rep = lambda_identity_check(&s, 1.5, &t);
        assert!(rep.is_pass() && rep.residual_abs < 1e-10, "{rep:?}");
        let rep = lambda_identity_check(&sphere(2, 2.0, Orientation::Outward, 16), 0.0, &t);
        assert!(rep.is_pass() && rep.residual_abs < 1e-10);
        let rep = lambda_identity_check(&s, 0.0, &t);
        assert_eq!(rep.status, CheckStatus::HypothesisViolated);
        let crate::report::MetaValue::Real(g) = rep.metadata["gate_residual_inf"] else {
            panic!()
        };
        assert!((g - 1.5).abs() < 1e-12);
    }
}
