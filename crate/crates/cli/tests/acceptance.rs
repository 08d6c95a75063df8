//! Acceptance suite: one PASS/FAIL line per criterion, with the
//! tolerances pinned below. Exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use hypercurv::classify::{sphere_lambda, theorem1_residual, theorem2_residual};
use hypercurv::kernel::{binomial, profile_from_values, trace_constant};
use hypercurv::surface::shapes::{self, icosphere, torus_mesh};
use hypercurv::{
    assemble, elementary_symmetric, garding_audit, hypothesis_audit, lambda_fit, lambda_identity_check,
    laplacian_x2_fem_check, lr_rho_identity_check, lr_rho_rhs, minkowski_check, newton_family,
    newton_inequality_gap, sample, sample_mesh, selfshrinker_residual, umbilicity_deviation, CheckReport,
    MetaValue, Orientation, PrincipalCurvatures, SampleSet, Square, SurfaceSource, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RESOLUTION: usize = 128;
const MINKOWSKI_ANALYTIC: f64 = 1e-8;
const MINKOWSKI_MESH: f64 = 5e-2;
const TIME_BUDGET: Duration = Duration::from_secs(10);
const SHRINKER_ANALYTIC: f64 = 1e-12;
const SHRINKER_MESH: f64 = 1e-2;
const UNIT_SPHERE_SHRINKER: f64 = 1.5;
const FORCED_VALUE: f64 = 1e-12;
const LAMBDA_FIT: f64 = 1e-10;
const THEOREM_LINF: f64 = 1e-8;
const TORUS_THEOREM1_MIN: f64 = 0.05;
const LR_INTEGRATED: f64 = 1e-6;
const LR_RHS_POINTWISE: f64 = 1e-10;
const FEM_L2: f64 = 5e-2;
const SYMMETRY: f64 = 1e-12;
const ROW_SUM: f64 = 1e-10;
const TRACE_REL: f64 = 1e-9;
const NEWTON_GAP_FLOOR: f64 = -1e-12;
const UMBILIC_DEVIATION: f64 = 1e-9;
const NORM_SQ_A_BOUND: f64 = 0.5;
const NORM_SQ_A_TOL: f64 = 1e-12;
const LAST_IDENTITY: f64 = 1e-10;

/// Outcome of one criterion: whether it passed and the evidence.
struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        if !ok {
            self.ok = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn fail(&mut self, note: impl Into<String>) {
        self.require(false, note);
    }
}

fn analytic(src: hypercurv::Result<SurfaceSource>, res: usize) -> hypercurv::Result<SampleSet> {
    sample(&src?, res)
}

fn mesh_set(mesh: hypercurv::TriMesh) -> hypercurv::Result<SampleSet> {
    sample_mesh(&SurfaceSource::mesh(mesh, Orientation::Outward)?)
}

fn real(v: &hypercurv::Verdict, key: &str) -> f64 {
    match v.params.get(key) {
        Some(MetaValue::Real(x)) => *x,
        _ => f64::NAN,
    }
}

fn linf(c: &CheckReport) -> f64 {
    c.residual_linf.unwrap_or(f64::NAN)
}

fn minkowski_all(o: &mut Outcome, label: &str, set: &SampleSet, tol: &Tolerances) -> hypercurv::Result<()> {
    for r in 0..set.dim() {
        let c = minkowski_check(set, r, tol)?;
        o.require(
            c.residual_rel < MINKOWSKI_ANALYTIC,
            format!("{label} r={r} rel {:.2e}", c.residual_rel),
        );
    }
    Ok(())
}

fn criterion_1() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    let shapes: Vec<(&str, Box<dyn Fn() -> hypercurv::Result<SurfaceSource>>)> = vec![
        ("S^2", Box::new(|| shapes::origin_sphere(2, 1.0, Orientation::Outward))),
        ("S^3", Box::new(|| shapes::origin_sphere(3, 1.0, Orientation::Outward))),
        ("ellipsoid(1,1.5,2)", Box::new(|| shapes::ellipsoid(vec![1.0, 1.5, 2.0], Orientation::Outward))),
        ("torus(2,0.5)", Box::new(|| shapes::torus(2.0, 0.5, Orientation::Outward))),
    ];
    for (label, build) in shapes {
        let start = Instant::now();
        let set = analytic(build(), RESOLUTION)?;
        minkowski_all(&mut o, label, &set, &tol)?;
        let spent = start.elapsed();
        o.require(spent < TIME_BUDGET, format!("{label} {:.1}s", spent.as_secs_f64()));
    }
    let mtol = Tolerances::mesh();
    let mut previous = [f64::INFINITY; 2];
    for level in 3..=5 {
        let set = mesh_set(icosphere(level, 1.0, [0.0; 3]))?;
        for r in 0..2 {
            let rel = minkowski_check(&set, r, &mtol)?.residual_rel;
            if level == 4 {
                o.require(rel < MINKOWSKI_MESH, format!("icosphere L4 r={r} rel {rel:.2e}"));
            }
            o.require(rel < previous[r], format!("icosphere L{level} r={r} decreasing"));
            previous[r] = rel;
        }
    }
    Ok(o)
}

fn criterion_2() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    for n in [2, 3] {
        let radius = (2.0 * n as f64).sqrt();
        let set = analytic(shapes::origin_sphere(n, radius, Orientation::Outward), 32)?;
        let (_, v) = selfshrinker_residual(&set, &tol);
        o.require(
            v.residual_inf < SHRINKER_ANALYTIC,
            format!("S^{n}(sqrt {}) inf {:.2e}", 2 * n, v.residual_inf),
        );
    }
    let set = mesh_set(icosphere(4, 2.0, [0.0; 3]))?;
    let (_, v) = selfshrinker_residual(&set, &Tolerances::mesh());
    o.require(v.residual_inf < SHRINKER_MESH, format!("icosphere(R=2) L4 inf {:.2e}", v.residual_inf));
    for orientation in [Orientation::Outward, Orientation::Inward] {
        let set = analytic(shapes::origin_sphere(2, 1.0, orientation), 32)?;
        let (_, v) = selfshrinker_residual(&set, &tol);
        let off = (v.residual_inf - UNIT_SPHERE_SHRINKER).abs();
        o.require(
            off < FORCED_VALUE && v.label == hypercurv::VerdictLabel::None,
            format!("unit sphere ({orientation}) inf {:.15}", v.residual_inf),
        );
    }
    Ok(o)
}

fn criterion_3() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    for (n, radius) in [(2, 1.0), (2, 2.0), (3, 1.0), (3, 6f64.sqrt())] {
        let set = analytic(shapes::origin_sphere(n, radius, Orientation::Outward), 32)?;
        let fit = real(&lambda_fit(&set, &tol), "lambda");
        let want = sphere_lambda(n, radius);
        o.require(
            (fit - want).abs() < LAMBDA_FIT,
            format!("(n={n}, R={radius:.4}) lambda {fit:.12} vs {want:.12}"),
        );
    }
    Ok(o)
}

fn criterion_4() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    let mut worst: f64 = 0.0;
    for (n, radius, res) in [(2, 1.0, 32), (2, 2.0, 32), (3, 1.5, 24), (4, 1.0, 12)] {
        let set = analytic(shapes::origin_sphere(n, radius, Orientation::Outward), res)?;
        for r in 0..n {
            let c = theorem1_residual(&set, r, &tol)?;
            worst = worst.max(linf(&c));
            o.require(linf(&c) < THEOREM_LINF, format!("S^{n}(R={radius}) theorem1 r={r}"));
        }
        for r in (1..n).filter(|r| r + 2 <= n) {
            let c = theorem2_residual(&set, r, &tol)?;
            worst = worst.max(linf(&c));
            o.require(linf(&c) < THEOREM_LINF, format!("S^{n}(R={radius}) theorem2 r={r}"));
        }
    }
    o.notes.insert(0, format!("worst sphere Linf {worst:.2e}"));
    let torus = analytic(shapes::torus(2.0, 0.5, Orientation::Outward), 64)?;
    let c = theorem1_residual(&torus, 0, &tol)?;
    o.require(linf(&c) > TORUS_THEOREM1_MIN, format!("torus theorem1 r=0 Linf {:.3}", linf(&c)));
    Ok(o)
}

fn criterion_5() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    let torus = analytic(shapes::torus(2.0, 0.5, Orientation::Outward), 64)?;
    for r in 0..2 {
        let c = lr_rho_identity_check(&torus, r, &tol)?;
        o.require(c.residual_rel < LR_INTEGRATED, format!("torus r={r} rel {:.2e}", c.residual_rel));
    }
    let mut worst: f64 = 0.0;
    for (n, radius) in [(2, 1.0), (2, 2.0), (3, 1.0)] {
        let set = analytic(shapes::origin_sphere(n, radius, Orientation::Outward), 24)?;
        for r in 0..n {
            let rhs = lr_rho_rhs(&set, r)?;
            worst = rhs.values.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    o.require(worst < LR_RHS_POINTWISE, format!("sphere RHS max {worst:.2e}"));
    Ok(o)
}

fn criterion_6() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::mesh();
    let mut previous = f64::INFINITY;
    for level in 3..=5 {
        let set = mesh_set(icosphere(level, 1.0, [0.0; 3]))?;
        let rel = laplacian_x2_fem_check(&set, &tol)?.residual_rel;
        if level == 4 {
            o.require(rel < FEM_L2, format!("L4 rel {rel:.2e}"));
        }
        o.require(rel < previous, format!("L{level} improving"));
        previous = rel;
    }
    let pinned = Tolerances {
        symmetry: SYMMETRY,
        row_sum: ROW_SUM,
        ..tol
    };
    for (label, mesh) in [("icosphere L4", icosphere(4, 1.0, [0.0; 3])), ("torus 64x32", torus_mesh(64, 32, 2.0, 0.5))] {
        let set = mesh_set(mesh)?;
        for r in 0..2 {
            for c in assemble(&set, r)?.divergence_checks(&pinned) {
                o.require(c.is_pass(), format!("{label} {} rel {:.1e}", c.name, c.residual_rel));
            }
        }
    }
    Ok(o)
}

/// Brute-force `S_r` over all r-subsets.
fn subset_sum(k: &[f64], r: usize) -> f64 {
    (0u32..1 << k.len())
        .filter(|m| m.count_ones() as usize == r)
        .map(|m| (0..k.len()).filter(|i| m >> i & 1 == 1).map(|i| k[i]).product::<f64>())
        .sum()
}

fn criterion_7() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=8);
        // small integers: every partial sum is exact in f64
        let k: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-9i32..=9))).collect();
        let pc = PrincipalCurvatures::new(k.clone())?;
        for r in 0..=n {
            if elementary_symmetric(&pc, r)? != subset_sum(&k, r) {
                mismatches += 1;
            }
        }
    }
    o.require(mismatches == 0, format!("10^4 sets, {mismatches} inexact S_r"));
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let n = rng.gen_range(1..=6);
        let mut a = Square::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-2.0..2.0);
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let fam = newton_family(&a)?;
        let p = hypercurv::curvature_profile(&PrincipalCurvatures::from_shape_operator(&a)?);
        for r in 0..n {
            let c = trace_constant(n, r);
            let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1.0);
            worst = worst.max(rel(fam.traces[r], c * p.h(r)));
            worst = worst.max(rel(a.mul(&fam.p[r]).trace(), c * p.h(r + 1)));
        }
    }
    o.require(worst < TRACE_REL, format!("10^3 matrices, worst trace rel {worst:.1e}"));
    Ok(o)
}

fn criterion_8() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_gap = f64::INFINITY;
    let mut equal_off_umbilic = 0;
    for _ in 0..100_000 {
        let n = rng.gen_range(2..=8);
        let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = profile_from_values(&k);
        for r in 1..n {
            min_gap = min_gap.min(newton_inequality_gap(&p, r)?);
        }
        let dev = umbilicity_deviation(&PrincipalCurvatures::new(k)?);
        if dev >= UMBILIC_DEVIATION && newton_inequality_gap(&p, 1)? <= 0.0 {
            equal_off_umbilic += 1;
        }
    }
    o.require(min_gap >= NEWTON_GAP_FLOOR, format!("10^5 sets, min gap {min_gap:.1e}"));
    o.require(equal_off_umbilic == 0, format!("{equal_off_umbilic} zero gaps off umbilics"));
    let mut worst_umbilic: f64 = 0.0;
    for _ in 0..1_000 {
        let n = rng.gen_range(2..=8);
        let p = profile_from_values(&vec![rng.gen_range(-1.0..1.0); n]);
        for r in 1..n {
            worst_umbilic = worst_umbilic.max(newton_inequality_gap(&p, r)?.abs());
        }
    }
    o.require(worst_umbilic <= -NEWTON_GAP_FLOOR, format!("umbilic |gap| max {worst_umbilic:.1e}"));

    let mut garding_bad = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(3..=8);
        let k: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..2.0)).collect();
        let p = profile_from_values(&k);
        let positive = (1..=n).all(|i| p.h(i) > 0.0);
        let gaps_ok = garding_audit(&p, n - 2)?.iter().all(|e| e.gap >= NEWTON_GAP_FLOOR * binomial(n, 2));
        if !(positive && gaps_ok) {
            garding_bad += 1;
        }
    }
    o.require(garding_bad == 0, format!("10^4 positive sets, {garding_bad} audit failures"));
    for (label, axes) in [("ellipsoid n=2", vec![1.0, 1.5, 2.0]), ("ellipsoid n=3", vec![1.0, 1.2, 1.5, 2.0])] {
        let set = analytic(shapes::ellipsoid(axes, Orientation::Inward), 24)?;
        let audit = hypothesis_audit(&set, None);
        let positive = audit.hr_min.iter().skip(1).all(|&h| h > 0.0);
        let gaps = audit.garding_gap_min.iter().all(|&g| g >= NEWTON_GAP_FLOOR);
        o.require(positive && gaps, format!("{label} sampled H_i > 0 and garding gaps >= 0"));
    }
    Ok(o)
}

fn criterion_9() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let tol = Tolerances::analytic();
    let set = analytic(shapes::origin_sphere(2, 2.0, Orientation::Inward), 32)?;
    let audit = hypothesis_audit(&set, Some(sphere_lambda(2, 2.0)));
    o.require(
        (audit.norm_sq_a_max - NORM_SQ_A_BOUND).abs() < NORM_SQ_A_TOL,
        format!("S^2(2) |A|^2 max {:.15}", audit.norm_sq_a_max),
    );
    for (n, radius) in [(2, 1.0), (2, 2.0), (3, 1.0), (3, 6f64.sqrt())] {
        let set = analytic(shapes::origin_sphere(n, radius, Orientation::Outward), 32)?;
        let c = lambda_identity_check(&set, sphere_lambda(n, radius), &tol);
        o.require(
            c.residual_rel < LAST_IDENTITY,
            format!("S^{n}(R={radius:.3}) rel {:.1e}", c.residual_rel),
        );
    }
    Ok(o)
}

fn criterion_10() -> hypercurv::Result<Outcome> {
    let mut o = Outcome::new();
    let runs: [&[&str]; 3] = [
        &["analyze", "--shape", "ellipsoid", "--resolution", "32", "--orientation", "both"],
        &["lr-residual", "--shape", "torus", "--mesh-level", "2"],
        &["convergence", "--shape", "sphere", "--mesh-level", "0", "--levels", "2,3,4"],
    ];
    for args in runs {
        let output = |threads: &str| {
            Command::new(env!("CARGO_BIN_EXE_hypercurv"))
                .arg("--threads")
                .arg(threads)
                .args(args)
                .output()
                .map(|out| out.stdout)
        };
        let Ok(reference) = output("1") else {
            o.fail(format!("{} did not run", args[0]));
            continue;
        };
        let same = ["1", "2", "4", "8"]
            .iter()
            .all(|t| output(t).is_ok_and(|out| out == reference));
        o.require(same && !reference.is_empty(), format!("{} identical over 1,2,4,8 threads", args[0]));
    }
    Ok(o)
}

fn main() {
    let criteria: [(&str, fn() -> hypercurv::Result<Outcome>); 10] = [
        ("Minkowski formulas", criterion_1),
        ("self-shrinker characterization", criterion_2),
        ("lambda-hypersurface fit", criterion_3),
        ("theorem residuals", criterion_4),
        ("L_r(rho) identity", criterion_5),
        ("FEM Laplacian and divergence form", criterion_6),
        ("kernel oracle equivalence", criterion_7),
        ("Newton and Garding inequalities", criterion_8),
        ("|A|^2 boundary and lambda identity", criterion_9),
        ("determinism across thread counts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| {
            let mut o = Outcome::new();
            o.fail(format!("error: {e}"));
            o
        });
        let verdict = if outcome.ok { "PASS" } else { "FAIL" };
        if !outcome.ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {title} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.notes.join("; ")
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
