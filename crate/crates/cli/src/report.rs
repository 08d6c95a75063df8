use std::collections::BTreeMap;

use serde::Serialize;

use hypercurv::surface::shapes::ShapeInfo;
use hypercurv::surface::{MeshStats, Orientation, SourceKind};
use hypercurv::{CheckReport, CheckStatus, HypothesisAudit, Verdict};

use crate::config::RunConfig;

/// Bumped on any change to field names or meaning. CSV columns are fixed
/// within one schema version.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "hypercurv",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceStats {
    pub id: String,
    pub kind: SourceKind,
    pub n: usize,
    pub orientation: Orientation,
    pub area: f64,
    pub samples: usize,
    pub flagged_samples: usize,
    pub resolution: Option<usize>,
    pub mesh: Option<MeshStats>,
}

/// Everything computed for one sampled surface in one orientation.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceRun {
    pub stats: SurfaceStats,
    /// Checks that decide the exit code.
    pub checks: Vec<CheckReport>,
    /// Raw theorem residuals. Whether each equation holds is evidence, not
    /// a failure; the matching consistency entries live in `checks`.
    pub theorem_residuals: Vec<CheckReport>,
    pub audit: Option<HypothesisAudit>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceLevel {
    pub level: usize,
    pub samples: usize,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderStatus {
    Fitted,
    /// The residual fell to the roundoff floor within one step; the order
    /// is at least the reported value.
    LowerBound,
    /// Residuals sit at the roundoff floor: no order can be measured.
    Saturated,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSeries {
    pub check: String,
    pub r: Option<usize>,
    pub orientation: Orientation,
    /// `"resolution"` for analytic sweeps, `"subdivision"` for meshes.
    pub abscissa: &'static str,
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `log residual` against `log h`.
    pub fitted_order: Option<f64>,
    pub order_status: OrderStatus,
    pub monotone: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub hypothesis_violated: usize,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub surfaces: Vec<SurfaceRun>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Vec<ShapeInfo>>,
    pub summary: Summary,
    /// Wall-clock seconds per stage; present only when requested, since
    /// it breaks byte-identical output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            config,
            surfaces: Vec::new(),
            convergence: Vec::new(),
            catalog: None,
            summary: Summary::default(),
            timings: None,
        }
    }

    /// Checks of every surface run (convergence series are judged separately).
    pub fn all_checks(&self) -> impl Iterator<Item = &CheckReport> {
        self.surfaces.iter().flat_map(|s| s.checks.iter())
    }

    /// Fills the summary and returns the exit code: 1 if any check failed
    /// or a convergence series misbehaved, else 0.
    pub fn finalize(&mut self) -> i32 {
        let mut s = Summary::default();
        for c in self.all_checks() {
            s.checks += 1;
            match c.status {
                CheckStatus::Pass => s.passed += 1,
                CheckStatus::Fail => s.failed += 1,
                CheckStatus::HypothesisViolated => s.hypothesis_violated += 1,
            }
        }
        let sweep_failed = self.convergence.iter().any(|c| {
            let last_failed = c.levels.last().is_some_and(|l| l.status == CheckStatus::Fail);
            let erratic = !c.monotone && c.order_status == OrderStatus::Fitted;
            last_failed || erratic
        });
        s.exit_code = if s.failed > 0 || sweep_failed { 1 } else { 0 };
        self.summary = s;
        self.summary.exit_code
    }
}
