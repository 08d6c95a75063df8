//! Command-line front end for `hypercurv`: shape generation, mesh
//! ingestion, check suites, convergence sweeps and JSON/CSV/text reports.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;

pub use config::{Command, OrientationChoice, OutputFormat, RunConfig, ShapeKind, ShapeSpec, SourceSpec, SweepCheck};
pub use error::{CliError, CliResult, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
pub use report::{RunReport, SCHEMA_VERSION};
pub use run::{convergence_sweep, run};

/// JSON Schema of the report, shipped with the binary.
pub const REPORT_SCHEMA: &str = include_str!("../schema/run-report.schema.json");

/// Runs `config` on a pool of `threads` workers (all cores when `None`).
/// Reports do not depend on the thread count.
pub fn run_with_threads(config: &RunConfig, threads: Option<usize>) -> CliResult<(RunReport, i32)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run(config))
}

/// Renders the report in the configured format.
pub fn render(report: &RunReport) -> CliResult<String> {
    match report.config.format {
        OutputFormat::Json => output::to_json(report),
        OutputFormat::Csv => output::to_csv(report),
        OutputFormat::Text => Ok(output::to_text(report)),
    }
}
