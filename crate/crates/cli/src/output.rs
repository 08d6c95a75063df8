use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use hypercurv::{CheckReport, CheckStatus};

use crate::error::{CliError, CliResult};
use crate::report::RunReport;

/// Pretty JSON with every float written to 17 significant digits, so
/// values round-trip exactly.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", sci(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `d.dddddddddddddddde±x`: 17 significant digits.
pub fn sci(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Stable CSV column set (one row per check report).
pub const CSV_COLUMNS: [&str; 13] = [
    "surface",
    "orientation",
    "role",
    "name",
    "status",
    "residual_abs",
    "residual_rel",
    "residual_linf",
    "normalizer",
    "tolerance",
    "samples",
    "flagged_samples",
    "r",
];

fn status_str(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::HypothesisViolated => "hypothesis-violated",
    }
}

fn order_of(c: &CheckReport) -> String {
    match c.metadata.get("r") {
        Some(hypercurv::MetaValue::Int(r)) => r.to_string(),
        _ => String::new(),
    }
}

pub fn to_csv(report: &RunReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for s in &report.surfaces {
        let rows = s
            .checks
            .iter()
            .map(|c| ("check", c))
            .chain(s.theorem_residuals.iter().map(|c| ("theorem", c)));
        for (role, c) in rows {
            w.write_record([
                s.stats.id.clone(),
                s.stats.orientation.to_string(),
                role.to_string(),
                c.name.clone(),
                status_str(c.status).to_string(),
                sci(c.residual_abs),
                sci(c.residual_rel),
                c.residual_linf.map(sci).unwrap_or_default(),
                sci(c.normalizer),
                sci(c.tolerance),
                c.samples.to_string(),
                c.flagged_samples.to_string(),
                order_of(c),
            ])
            .map_err(err)?;
        }
    }
    for series in &report.convergence {
        for l in &series.levels {
            w.write_record([
                format!("level {}", l.level),
                String::new(),
                "convergence".to_string(),
                series.check.clone(),
                status_str(l.status).to_string(),
                sci(l.residual_abs),
                sci(l.residual_rel),
                String::new(),
                String::new(),
                String::new(),
                l.samples.to_string(),
                String::new(),
                series.r.map(|r| r.to_string()).unwrap_or_default(),
            ])
            .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

fn check_line(out: &mut String, c: &CheckReport) {
    let _ = writeln!(
        out,
        "  {:<34} {:<20} rel {:>10.3e}  abs {:>10.3e}  tol {:.1e}",
        c.name,
        status_str(c.status),
        c.residual_rel,
        c.residual_abs,
        c.tolerance
    );
}

pub fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} ({})",
        report.tool.name,
        report.tool.version,
        report.config.command.as_str()
    );
    if let Some(catalog) = &report.catalog {
        for shape in catalog {
            let _ = writeln!(out, "{}: {}", shape.name, shape.description);
            for p in &shape.parameters {
                let _ = writeln!(out, "    {:<8} {} (default {}; {})", p.name, p.description, p.default, p.constraint);
            }
        }
    }
    for s in &report.surfaces {
        let st = &s.stats;
        let _ = writeln!(
            out,
            "\n{} [{:?}, n = {}, {}] area {:.6} over {} samples ({} flagged)",
            st.id, st.kind, st.n, st.orientation, st.area, st.samples, st.flagged_samples
        );
        if let Some(m) = &st.mesh {
            let _ = writeln!(out, "  mesh: V {} E {} F {} genus {}", m.vertices, m.edges, m.faces, m.genus);
        }
        if !s.checks.is_empty() {
            let _ = writeln!(out, "checks:");
            s.checks.iter().for_each(|c| check_line(&mut out, c));
        }
        if !s.theorem_residuals.is_empty() {
            let _ = writeln!(out, "theorem residuals (evidence, not pass/fail):");
            s.theorem_residuals.iter().for_each(|c| check_line(&mut out, c));
        }
        for v in &s.verdicts {
            let _ = writeln!(
                out,
                "verdict {:<12} {:?}  residual inf {:.3e} (tol {:.1e})",
                v.classifier, v.label, v.residual_inf, v.tolerance_used
            );
            for (k, p) in &v.params {
                let _ = writeln!(out, "    {k} = {}", serde_json::to_string(p).unwrap_or_default());
            }
        }
        if let Some(a) = &s.audit {
            let _ = writeln!(
                out,
                "audit: rho_min {:.6e}, |A|^2 max {:.6e}, P_r min eigen {:?}",
                a.rho_min, a.norm_sq_a_max, a.pr_min_eigen
            );
        }
    }
    for c in &report.convergence {
        let _ = writeln!(out, "\nconvergence of {} ({}):", c.check, c.abscissa);
        for l in &c.levels {
            let _ = writeln!(out, "  {:>5}  rel {:.3e}  {}", l.level, l.residual_rel, status_str(l.status));
        }
        let order = c.fitted_order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "  order {order} ({:?}), monotone {}", c.order_status, c.monotone);
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "\n{} checks: {} passed, {} failed, {} hypothesis-violated; exit {}",
        s.checks, s.passed, s.failed, s.hypothesis_violated, s.exit_code
    );
    if let Some(t) = &report.timings {
        for (stage, secs) in t {
            let _ = writeln!(out, "  {stage}: {secs:.3}s");
        }
    }
    out
}
