use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use hypercurv::surface::MIN_RESOLUTION;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Minkowski,
    Classify,
    LrResidual,
    Convergence,
    Shapes,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Minkowski => "minkowski",
            Command::Classify => "classify",
            Command::LrResidual => "lr-residual",
            Command::Convergence => "convergence",
            Command::Shapes => "shapes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Sphere,
    Ellipsoid,
    Torus,
}

/// Built-in shape with its parameters. `mesh_level` selects the
/// triangulated version at that refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub shape: ShapeKind,
    pub radius: f64,
    pub dim: usize,
    pub center: Option<Vec<f64>>,
    pub axes: Vec<f64>,
    pub major: f64,
    pub minor: f64,
    pub mesh_level: Option<usize>,
}

impl Default for ShapeSpec {
    fn default() -> Self {
        Self {
            shape: ShapeKind::Sphere,
            radius: 1.0,
            dim: 2,
            center: None,
            axes: vec![1.0, 1.5, 2.0],
            major: 2.0,
            minor: 0.5,
            mesh_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    Shape(ShapeSpec),
    MeshFile { path: PathBuf },
}

impl SourceSpec {
    pub fn is_mesh(&self) -> bool {
        match self {
            SourceSpec::Shape(s) => s.mesh_level.is_some(),
            SourceSpec::MeshFile { .. } => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationChoice {
    /// Built-in shapes: outward; mesh files: the stored winding.
    AsGiven,
    Outward,
    Inward,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Check tracked across refinement levels by `convergence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCheck {
    Minkowski,
    LaplacianFem,
    LrIdentity,
    LrPointwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<SourceSpec>,
    /// Curvature orders; `None` means every admissible order.
    pub orders: Option<Vec<usize>>,
    pub resolution: usize,
    pub levels: Vec<usize>,
    pub sweep_check: SweepCheck,
    pub orientation: OrientationChoice,
    /// Overrides by tolerance key.
    pub tolerances: BTreeMap<String, f64>,
    /// λ for the λ-hypersurface identity and audit; fitted when absent.
    pub lambda: Option<f64>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub export_stiffness: Option<PathBuf>,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(command: Command, source: Option<SourceSpec>) -> Self {
        Self {
            command,
            source,
            orders: None,
            resolution: 64,
            levels: Vec::new(),
            sweep_check: SweepCheck::Minkowski,
            orientation: OrientationChoice::AsGiven,
            tolerances: BTreeMap::new(),
            lambda: None,
            format: OutputFormat::Json,
            output: None,
            export_stiffness: None,
            timings: false,
        }
    }

    /// Structural checks that do not need the surface.
    pub fn validate(&self) -> CliResult<()> {
        if self.command != Command::Shapes && self.source.is_none() {
            return Err(CliError::Config(format!(
                "'{}' needs a surface: pass --shape or --mesh",
                self.command.as_str()
            )));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(CliError::Config(format!(
                "resolution must be >= {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        for (key, value) in &self.tolerances {
            if !(value.is_finite() && *value > 0.0) {
                return Err(CliError::Config(format!("tolerance '{key}' must be positive, got {value}")));
            }
        }
        if self.command == Command::Convergence {
            if self.levels.len() < 3 {
                return Err(CliError::Config(format!(
                    "convergence needs at least 3 levels, got {}",
                    self.levels.len()
                )));
            }
            if matches!(self.source, Some(SourceSpec::MeshFile { .. })) {
                return Err(CliError::Config(
                    "convergence needs a built-in shape to refine, not a mesh file".into(),
                ));
            }
            let mesh = self.source.as_ref().is_some_and(SourceSpec::is_mesh);
            if !mesh && self.levels.iter().any(|&l| l < MIN_RESOLUTION) {
                return Err(CliError::Config(format!(
                    "analytic convergence levels are resolutions and must be >= {MIN_RESOLUTION}"
                )));
            }
        }
        if let Some(SourceSpec::Shape(s)) = &self.source {
            s.validate()?;
        }
        Ok(())
    }
}

impl ShapeSpec {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        match self.shape {
            ShapeKind::Sphere => {
                if self.dim == 0 {
                    return bad("sphere dimension must be >= 1".into());
                }
                if let Some(c) = &self.center {
                    if c.len() != self.dim + 1 {
                        return bad(format!("--center needs {} coordinates for n = {}", self.dim + 1, self.dim));
                    }
                }
                if self.mesh_level.is_some() && self.dim != 2 {
                    return bad("sphere meshes exist only for n = 2".into());
                }
            }
            ShapeKind::Ellipsoid => {
                if !(3..=4).contains(&self.axes.len()) {
                    return bad(format!("ellipsoid needs 3 or 4 axes, got {}", self.axes.len()));
                }
                if self.mesh_level.is_some() && self.axes.len() != 3 {
                    return bad("ellipsoid meshes need 3 axes".into());
                }
            }
            ShapeKind::Torus => {
                if !(self.major > self.minor && self.minor > 0.0) {
                    return bad(format!("torus needs R > r > 0, got R = {}, r = {}", self.major, self.minor));
                }
            }
        }
        Ok(())
    }

    /// Surface dimension n.
    pub fn dim(&self) -> usize {
        match self.shape {
            ShapeKind::Sphere => self.dim,
            ShapeKind::Ellipsoid => self.axes.len() - 1,
            ShapeKind::Torus => 2,
        }
    }
}

/// Parses `key=value` tolerance overrides.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad tolerance value '{v}': {e}"))?;
    Ok((k.trim().to_string(), v))
}
