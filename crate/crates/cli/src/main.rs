use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypercurv_cli::config::parse_tolerance;
use hypercurv_cli::{
    render, run_with_threads, CliError, Command, OrientationChoice, OutputFormat, RunConfig, ShapeKind, ShapeSpec,
    SourceSpec, SweepCheck, EXIT_ERROR,
};

/// Higher-order mean curvature checks for closed hypersurfaces.
#[derive(Parser)]
#[command(name = "hypercurv", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "HYPERCURV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Every identity check, classifier and audit.
    Analyze(SurfaceArgs),
    /// Minkowski formulas for the selected orders.
    Minkowski(SurfaceArgs),
    /// Sphere, self-shrinker and λ verdicts, hypothesis audit, theorem residuals.
    Classify(SurfaceArgs),
    /// L_r(ρ) identity, and on meshes the weak-operator checks.
    LrResidual(LrArgs),
    /// One check across refinement levels with a fitted order.
    Convergence(SweepArgs),
    /// List the built-in shapes.
    Shapes(OutputArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in shape.
    #[arg(long, value_enum, conflicts_with = "mesh")]
    shape: Option<ShapeKind>,
    /// OFF or OBJ triangle mesh.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Sphere radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Sphere dimension n.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Sphere center, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    /// Ellipsoid semi-axes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
    axes: Vec<f64>,
    /// Torus major radius.
    #[arg(long = "R", default_value_t = 2.0)]
    major: f64,
    /// Torus minor radius.
    #[arg(long = "r", default_value_t = 0.5)]
    minor: f64,
    /// Triangulate the built-in shape at this refinement level.
    #[arg(long)]
    mesh_level: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Curvature orders r (default: all admissible).
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Gauss–Legendre nodes per parameter axis.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = OrientationChoice::AsGiven)]
    orientation: OrientationChoice,
    /// Tolerance override, KEY=VALUE (repeatable).
    #[arg(long = "tol", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// λ for the λ-hypersurface identity (default: fitted).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Add wall-clock stage timings to the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    checks: CheckArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct LrArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Write the L_r stiffness matrix in Matrix Market format (meshes).
    #[arg(long)]
    export_stiffness: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Resolutions (analytic) or subdivision levels (with --mesh-level).
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SweepCheck::Minkowski)]
    check: SweepCheck,
}

fn source(args: &SourceArgs) -> Option<SourceSpec> {
    if let Some(path) = &args.mesh {
        return Some(SourceSpec::MeshFile { path: path.clone() });
    }
    args.shape.map(|shape| {
        SourceSpec::Shape(ShapeSpec {
            shape,
            radius: args.radius,
            dim: args.dim,
            center: args.center.clone(),
            axes: args.axes.clone(),
            major: args.major,
            minor: args.minor,
            mesh_level: args.mesh_level,
        })
    })
}

fn surface_config(command: Command, a: &SurfaceArgs) -> RunConfig {
    let mut c = RunConfig::new(command, source(&a.source));
    c.orders = a.checks.orders.clone();
    c.resolution = a.checks.resolution;
    c.orientation = a.checks.orientation;
    c.tolerances = a.checks.tolerances.iter().cloned().collect();
    c.lambda = a.checks.lambda;
    c.timings = a.checks.timings;
    c.format = a.out.format;
    c.output = a.out.output.clone();
    c
}

fn config(cmd: &Cmd) -> RunConfig {
    match cmd {
        Cmd::Analyze(a) => surface_config(Command::Analyze, a),
        Cmd::Minkowski(a) => surface_config(Command::Minkowski, a),
        Cmd::Classify(a) => surface_config(Command::Classify, a),
        Cmd::LrResidual(a) => {
            let mut c = surface_config(Command::LrResidual, &a.surface);
            c.export_stiffness = a.export_stiffness.clone();
            c
        }
        Cmd::Convergence(a) => {
            let mut c = surface_config(Command::Convergence, &a.surface);
            c.levels = a.levels.clone();
            c.sweep_check = a.check;
            c
        }
        Cmd::Shapes(o) => {
            let mut c = RunConfig::new(Command::Shapes, None);
            c.format = o.format;
            c.output = o.output.clone();
            c
        }
    }
}

fn execute(config: &RunConfig, threads: Option<usize>) -> Result<i32, CliError> {
    let (report, code) = run_with_threads(config, threads)?;
    let text = render(&report)?;
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = config(&cli.command);
    match execute(&config, cli.threads) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
