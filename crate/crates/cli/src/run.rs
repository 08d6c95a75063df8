use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hypercurv::classify::{lambda_fit, theorem1_residual, theorem2_residual};
use hypercurv::surface::shapes::{self, ellipsoid_mesh, icosphere, shape_catalog, torus_mesh};
use hypercurv::surface::{load_mesh, Orientation, SurfaceSource};
use hypercurv::{
    assemble, hypothesis_audit, laplacian_x2_check, laplacian_x2_fem_check, lambda_identity_check,
    lr_rho_identity_check, lr_rho_pointwise_check, minkowski_check, selfshrinker_residual,
    selfshrinker_weighted_identity, sphere_verdict, CheckReport, CheckStatus, HypothesisAudit, MetaValue,
    SampleSet, SourceKind, Tolerances, Verdict, VerdictLabel,
};

use crate::config::{Command, OrientationChoice, RunConfig, ShapeKind, ShapeSpec, SourceSpec, SweepCheck};
use crate::error::{CliError, CliResult};
use crate::report::{
    ConvergenceLevel, ConvergenceSeries, OrderStatus, RunReport, SurfaceRun, SurfaceStats,
};

/// Relative residuals at or below this are roundoff: refinement cannot
/// lower them further, so no convergence order is fitted from them.
pub const SATURATION_FLOOR: f64 = 1e-13;

/// Accumulated wall-clock seconds per stage.
struct Timer {
    on: bool,
    stages: BTreeMap<String, f64>,
}

impl Timer {
    fn new(on: bool) -> Self {
        Self {
            on,
            stages: BTreeMap::new(),
        }
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.stages.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.on.then_some(self.stages)
    }
}

/// Runs one command. The exit code is 0 when every check passed and 1
/// when at least one failed; errors (exit 2) come back as `Err`.
pub fn run(config: &RunConfig) -> CliResult<(RunReport, i32)> {
    config.validate()?;
    let mut timer = Timer::new(config.timings);
    let mut report = RunReport::new(config.clone());
    match config.command {
        Command::Shapes => report.catalog = Some(shape_catalog()),
        Command::Convergence => report.convergence = sweep(config, &mut timer)?,
        _ => {
            let spec = config.source.as_ref().expect("validated");
            let base = timer.stage("load", || build_source(spec))?;
            let orientations = resolve_orientations(config.orientation, &base);
            let multi = orientations.len() > 1;
            for o in orientations {
                let src = base.with_orientation(o);
                let set = timer.stage("sample", || hypercurv::sample(&src, config.resolution))?;
                let tol = tolerances(config, set.kind())?;
                let run = timer.stage(config.command.as_str(), || surface_run(config, &src, &set, &tol, multi))?;
                report.surfaces.push(run);
            }
        }
    }
    let code = report.finalize();
    report.timings = timer.finish();
    Ok((report, code))
}

/// Runs the selected check over refinement levels and fits the
/// convergence order.
pub fn convergence_sweep(config: &RunConfig) -> CliResult<(RunReport, i32)> {
    let mut config = config.clone();
    config.command = Command::Convergence;
    run(&config)
}

fn tolerances(config: &RunConfig, kind: SourceKind) -> CliResult<Tolerances> {
    let mut t = Tolerances::for_kind(kind);
    for (key, value) in &config.tolerances {
        t.set(key, *value).map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(t)
}

/// Source in its stored orientation (`Outward`; for mesh files that is
/// the given winding).
pub fn build_source(spec: &SourceSpec) -> CliResult<SurfaceSource> {
    let o = Orientation::Outward;
    match spec {
        SourceSpec::MeshFile { path } => {
            let input = |source: hypercurv::Error| CliError::Input {
                path: path.clone(),
                source,
            };
            let mesh = load_mesh(path).map_err(input)?;
            SurfaceSource::mesh(mesh, o).map_err(input)
        }
        SourceSpec::Shape(s) => Ok(shape_source(s)?),
    }
}

fn shape_source(s: &ShapeSpec) -> hypercurv::Result<SurfaceSource> {
    let o = Orientation::Outward;
    let center = s.center.clone().unwrap_or_else(|| vec![0.0; s.dim() + 1]);
    match (s.shape, s.mesh_level) {
        (ShapeKind::Sphere, None) => shapes::sphere(s.dim, s.radius, center, o),
        (ShapeKind::Sphere, Some(level)) => {
            let c = [center[0], center[1], center[2]];
            SurfaceSource::mesh(icosphere(level, s.radius, c), o)
        }
        (ShapeKind::Ellipsoid, None) => shapes::ellipsoid(s.axes.clone(), o),
        (ShapeKind::Ellipsoid, Some(level)) => {
            SurfaceSource::mesh(ellipsoid_mesh(level, [s.axes[0], s.axes[1], s.axes[2]]), o)
        }
        (ShapeKind::Torus, None) => shapes::torus(s.major, s.minor, o),
        (ShapeKind::Torus, Some(level)) => {
            SurfaceSource::mesh(torus_mesh(4 << level, 2 << level, s.major, s.minor), o)
        }
    }
}

/// Orientations to run. For meshes "outward" is decided by the sign of
/// the enclosed volume; smooth sources are built outward.
pub fn resolve_orientations(choice: OrientationChoice, src: &SurfaceSource) -> Vec<Orientation> {
    let outward = match src {
        SurfaceSource::Mesh { mesh, .. } if mesh.signed_volume() < 0.0 => Orientation::Inward,
        _ => Orientation::Outward,
    };
    match choice {
        OrientationChoice::AsGiven => vec![src.orientation()],
        OrientationChoice::Outward => vec![outward],
        OrientationChoice::Inward => vec![outward.reversed()],
        OrientationChoice::Both => vec![outward, outward.reversed()],
    }
}

fn orders(config: &RunConfig, n: usize) -> CliResult<Vec<usize>> {
    match &config.orders {
        None => Ok((0..n).collect()),
        Some(list) => {
            if let Some(r) = list.iter().find(|&&r| r >= n) {
                return Err(CliError::Config(format!(
                    "order r = {r} outside [0, n-1] = [0, {}]",
                    n - 1
                )));
            }
            let mut v = list.clone();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
    }
}

fn stats(config: &RunConfig, src: &SurfaceSource, set: &SampleSet) -> SurfaceStats {
    SurfaceStats {
        id: src.id(),
        kind: set.kind(),
        n: set.dim(),
        orientation: set.orientation(),
        area: set.total_area(),
        samples: set.len(),
        flagged_samples: set.flagged_count(),
        resolution: set.kind().is_smooth().then_some(config.resolution),
        mesh: src.mesh_stats().copied(),
    }
}

fn surface_run(
    config: &RunConfig,
    src: &SurfaceSource,
    set: &SampleSet,
    tol: &Tolerances,
    multi_orientation: bool,
) -> CliResult<SurfaceRun> {
    let rs = orders(config, set.dim())?;
    let mut run = SurfaceRun {
        stats: stats(config, src, set),
        checks: Vec::new(),
        theorem_residuals: Vec::new(),
        audit: None,
        verdicts: Vec::new(),
    };
    if config.export_stiffness.is_some() && config.command != Command::LrResidual {
        return Err(CliError::Config("--export-stiffness is only available for lr-residual".into()));
    }
    match config.command {
        Command::Minkowski => run.checks = minkowski_checks(set, &rs, tol)?,
        Command::LrResidual => run.checks = lr_checks(config, set, &rs, tol, multi_orientation)?,
        Command::Classify => classify(config, set, &rs, tol, &mut run)?,
        Command::Analyze => {
            run.checks = minkowski_checks(set, &rs, tol)?;
            run.checks.push(laplacian_x2_check(set, tol));
            run.checks.extend(lr_checks(config, set, &rs, tol, multi_orientation)?);
            classify(config, set, &rs, tol, &mut run)?;
        }
        Command::Shapes | Command::Convergence => unreachable!("handled by run"),
    }
    Ok(run)
}

fn minkowski_checks(set: &SampleSet, rs: &[usize], tol: &Tolerances) -> CliResult<Vec<CheckReport>> {
    Ok(rs
        .iter()
        .map(|&r| minkowski_check(set, r, tol))
        .collect::<hypercurv::Result<_>>()?)
}

fn stiffness_path(base: &Path, r: usize, orientation: Orientation, suffix: bool) -> PathBuf {
    if !suffix {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mtx".into());
    base.with_file_name(format!("{stem}.r{r}.{orientation}.{ext}"))
}

fn lr_checks(
    config: &RunConfig,
    set: &SampleSet,
    rs: &[usize],
    tol: &Tolerances,
    multi_orientation: bool,
) -> CliResult<Vec<CheckReport>> {
    let mut out = Vec::new();
    for &r in rs {
        out.push(lr_rho_identity_check(set, r, tol)?);
    }
    if set.kind() != SourceKind::Mesh {
        if config.export_stiffness.is_some() {
            return Err(CliError::Config("--export-stiffness needs a mesh source".into()));
        }
        return Ok(out);
    }
    out.push(laplacian_x2_fem_check(set, tol)?);
    for &r in rs {
        let op = assemble(set, r)?;
        out.extend(op.divergence_checks(tol));
        out.push(lr_rho_pointwise_check(set, r, tol)?);
        if let Some(base) = &config.export_stiffness {
            let path = stiffness_path(base, r, set.orientation(), rs.len() > 1 || multi_orientation);
            let file = std::fs::File::create(&path).map_err(|source| CliError::Output {
                path: path.clone(),
                source,
            })?;
            op.write_matrix_market(std::io::BufWriter::new(file))?;
        }
    }
    Ok(out)
}

fn real_param(v: &Verdict, key: &str) -> Option<f64> {
    match v.params.get(key) {
        Some(MetaValue::Real(x)) => Some(*x),
        _ => None,
    }
}

/// Origin-centered round sphere: the only surfaces on which the theorem
/// equations hold.
fn centered_sphere(v: &Verdict, tol: &Tolerances) -> bool {
    if v.label != VerdictLabel::RoundSphere {
        return false;
    }
    let radius = real_param(v, "radius").unwrap_or(f64::NAN);
    let offset = match v.params.get("center") {
        Some(MetaValue::Vector(c)) => c.iter().map(|x| x * x).sum::<f64>().sqrt(),
        _ => f64::INFINITY,
    };
    offset <= tol.sphere * radius
}

/// Hypotheses of the two theorems at order `r`, or the first one that
/// fails.
fn theorem_hypotheses(
    audit: &HypothesisAudit,
    set: &SampleSet,
    r: usize,
    needs_constant_hr: bool,
    slack: f64,
    tol: &Tolerances,
) -> Result<(), String> {
    let rho_scale = set.supports().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if audit.rho_min < -slack * rho_scale {
        return Err(format!("support function negative (min {:e})", audit.rho_min));
    }
    let eig = audit.pr_min_eigen[r];
    if !(eig > 0.0) {
        return Err(format!("P_{r} not positive definite (least eigenvalue {eig:e})"));
    }
    if needs_constant_hr && !audit.hr_constant(r, tol.constancy) {
        return Err(format!(
            "H_{r} not constant (relative std {:e})",
            audit.hr_relative_std[r]
        ));
    }
    Ok(())
}

/// Consistency of a theorem residual with the sphere verdict: when the
/// hypotheses hold, the equation must be satisfied exactly on
/// origin-centered round spheres.
fn consistency(
    residual: &CheckReport,
    hypotheses: Result<(), String>,
    sphere: bool,
) -> CheckReport {
    let name = residual.name.replacen('[', "-consistency[", 1);
    let holds = residual.is_pass();
    let mut rep = CheckReport::evaluate(
        name,
        residual.residual_abs,
        residual.normalizer,
        residual.tolerance,
        residual.samples,
        residual.flagged_samples,
    );
    rep.metadata = residual.metadata.clone();
    rep = rep.with("equation_satisfied", holds).with("centered_round_sphere", sphere);
    if let Err(reason) = hypotheses {
        return rep.hypothesis_violated(reason);
    }
    let ok = holds == sphere;
    rep.status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
    rep.passed = Some(ok);
    rep
}

fn classify(
    config: &RunConfig,
    set: &SampleSet,
    rs: &[usize],
    tol: &Tolerances,
    run: &mut SurfaceRun,
) -> CliResult<()> {
    let n = set.dim();
    let sphere = sphere_verdict(set, tol);
    let (_, shrinker) = selfshrinker_residual(set, tol);
    let fit = lambda_fit(set, tol);
    let lambda = config
        .lambda
        .or_else(|| real_param(&fit, "lambda"))
        .unwrap_or(0.0);
    let audit = hypothesis_audit(set, Some(lambda));
    let centered = centered_sphere(&sphere, tol);
    // L_r of a per-vertex curvature estimate does not converge under mesh
    // refinement, so on meshes the theorem residuals are reported only.
    let judge = set.kind() != SourceKind::Mesh;

    run.checks.push(lambda_identity_check(set, lambda, tol));
    for &r in rs.iter().filter(|&&r| r >= 1 && r + 2 <= n) {
        run.checks.push(selfshrinker_weighted_identity(set, r, tol)?);
    }
    for &r in rs {
        let t1 = theorem1_residual(set, r, tol)?;
        let hyp = theorem_hypotheses(&audit, set, r, false, t1.tolerance, tol);
        if judge {
            run.checks.push(consistency(&t1, hyp, centered));
        }
        run.theorem_residuals.push(t1);
    }
    for &r in rs.iter().filter(|&&r| r >= 1 && r + 2 <= n) {
        let t2 = theorem2_residual(set, r, tol)?;
        let hyp = theorem_hypotheses(&audit, set, r, true, t2.tolerance, tol);
        if judge {
            run.checks.push(consistency(&t2, hyp, centered));
        }
        run.theorem_residuals.push(t2);
    }
    run.verdicts = vec![sphere, shrinker, fit];
    run.audit = Some(audit);
    Ok(())
}

fn sweep_report(check: SweepCheck, set: &SampleSet, r: Option<usize>, tol: &Tolerances) -> CliResult<CheckReport> {
    let r = r.unwrap_or(0);
    Ok(match check {
        SweepCheck::Minkowski => minkowski_check(set, r, tol)?,
        SweepCheck::LaplacianFem => laplacian_x2_fem_check(set, tol)?,
        SweepCheck::LrIdentity => lr_rho_identity_check(set, r, tol)?,
        SweepCheck::LrPointwise => lr_rho_pointwise_check(set, r, tol)?,
    })
}

fn sweep_name(check: SweepCheck) -> &'static str {
    match check {
        SweepCheck::Minkowski => "minkowski",
        SweepCheck::LaplacianFem => "laplacian-x2-fem",
        SweepCheck::LrIdentity => "lr-rho-identity",
        SweepCheck::LrPointwise => "lr-rho-pointwise",
    }
}

fn sweep(config: &RunConfig, timer: &mut Timer) -> CliResult<Vec<ConvergenceSeries>> {
    let Some(SourceSpec::Shape(spec)) = &config.source else {
        unreachable!("validated: convergence needs a built-in shape")
    };
    let mesh = spec.mesh_level.is_some();
    let check = config.sweep_check;
    if !mesh && matches!(check, SweepCheck::LaplacianFem | SweepCheck::LrPointwise) {
        return Err(CliError::Config(format!(
            "{} needs a mesh: add --mesh-level",
            sweep_name(check)
        )));
    }
    let n = spec.dim();
    let rs: Vec<Option<usize>> = match check {
        SweepCheck::LaplacianFem => vec![None],
        _ => orders(config, n)?.into_iter().map(Some).collect(),
    };

    // one sample set per level and orientation, reused for every order
    let mut series: BTreeMap<(usize, Option<usize>), ConvergenceSeries> = BTreeMap::new();
    let first = {
        let mut s = spec.clone();
        if mesh {
            s.mesh_level = Some(config.levels[0]);
        }
        shape_source(&s)?
    };
    let orientations = resolve_orientations(config.orientation, &first);
    for &level in &config.levels {
        let (src_spec, resolution) = if mesh {
            let mut s = spec.clone();
            s.mesh_level = Some(level);
            (s, config.resolution)
        } else {
            (spec.clone(), level)
        };
        let base = timer.stage("load", || shape_source(&src_spec))?;
        for (oi, &o) in orientations.iter().enumerate() {
            let src = base.with_orientation(o);
            let set = timer.stage("sample", || hypercurv::sample(&src, resolution))?;
            let tol = tolerances(config, set.kind())?;
            for &r in &rs {
                let rep = timer.stage("convergence", || sweep_report(check, &set, r, &tol))?;
                let entry = series.entry((oi, r)).or_insert_with(|| ConvergenceSeries {
                    check: match r {
                        Some(r) => format!("{}[r={r}]", sweep_name(check)),
                        None => sweep_name(check).to_string(),
                    },
                    r,
                    orientation: o,
                    abscissa: if mesh { "subdivision" } else { "resolution" },
                    levels: Vec::new(),
                    fitted_order: None,
                    order_status: OrderStatus::Saturated,
                    monotone: true,
                });
                entry.levels.push(ConvergenceLevel {
                    level,
                    samples: set.len(),
                    residual_abs: rep.residual_abs,
                    residual_rel: rep.residual_rel,
                    status: rep.status,
                });
            }
        }
    }
    let mut out: Vec<ConvergenceSeries> = series.into_values().collect();
    for s in &mut out {
        fit_order(s, mesh);
    }
    Ok(out)
}

/// Least-squares slope of `log e` against `log h` over the levels above
/// the roundoff floor; `h = 1/resolution` or `2^-level`.
fn fit_order(s: &mut ConvergenceSeries, mesh: bool) {
    let h = |level: usize| {
        if mesh {
            0.5f64.powi(level as i32)
        } else {
            1.0 / level as f64
        }
    };
    let pts: Vec<(f64, f64)> = s
        .levels
        .iter()
        .filter(|l| l.residual_rel > SATURATION_FLOOR)
        .map(|l| (h(l.level).ln(), l.residual_rel.ln()))
        .collect();
    s.monotone = s.levels.windows(2).all(|w| {
        let (a, b) = (w[0].residual_rel, w[1].residual_rel);
        b < a || (a <= SATURATION_FLOOR && b <= SATURATION_FLOOR)
    });
    if pts.len() < 2 {
        // One level above the floor followed by a saturated one: the slope
        // to the floor itself bounds the order from below.
        let drop = s.levels.windows(2).find(|w| {
            w[0].residual_rel > SATURATION_FLOOR && w[1].residual_rel <= SATURATION_FLOOR
        });
        match drop {
            Some(w) => {
                let rise = (w[0].residual_rel / SATURATION_FLOOR).ln();
                s.fitted_order = Some(rise / (h(w[0].level) / h(w[1].level)).ln());
                s.order_status = OrderStatus::LowerBound;
            }
            None => {
                s.fitted_order = None;
                s.order_status = OrderStatus::Saturated;
            }
        }
        return;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    s.fitted_order = Some(sxy / sxx);
    s.order_status = OrderStatus::Fitted;
}
