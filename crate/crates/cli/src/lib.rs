//! Command-line front end for the Dirac quantum cellular automaton: run
//! configuration, experiment drivers and CSV/JSON output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde_json::json;

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Diagnostic, Experiment, Format, RunConfig, Severity};
pub use error::CliError;
pub use output::{Cell, Table};

#[derive(Debug, Parser)]
#[command(
    name = "dirac-qca",
    version,
    about = "Simulate the one-dimensional Dirac quantum cellular automaton"
)]
pub struct Args {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Override a setting, `key=value` with key `section.field` or a unique field name.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Args {
    /// The configuration these arguments describe, before validation.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                RunConfig::from_toml_str(&text)?
            }
            None => RunConfig::default(),
        };
        for assignment in &self.overrides {
            config.apply_override(assignment)?;
        }
        // dedicated flags win over --set
        if let Some(e) = self.experiment {
            config.experiment = e;
        }
        if let Some(dir) = &self.out {
            config.output.dir = dir.display().to_string();
        }
        if let Some(f) = self.format {
            config.output.format = f;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<Diagnostic>,
}

/// Validates, runs and writes. Nothing is written unless the whole
/// experiment succeeds.
pub fn execute(config: &RunConfig) -> Result<RunReport, CliError> {
    let diagnostics = config.validate();
    if !config::runnable(&diagnostics) {
        return Err(CliError::Invalid(diagnostics));
    }
    let started = Instant::now();
    let tables = experiments::run(config)?;
    let wall = started.elapsed().as_secs_f64();

    let dir = Path::new(&config.output.dir);
    output::create_dir(dir)?;
    let mut outputs = Vec::with_capacity(tables.len() + 1);
    for table in &tables {
        outputs.push(output::write_table(dir, table, config.output.format)?);
    }
    let manifest = manifest(config, &outputs, wall)?;
    let path = dir.join("manifest.json");
    output::write_file(&path, &manifest)?;
    outputs.push(path);
    Ok(RunReport {
        outputs,
        warnings: diagnostics,
    })
}

fn manifest(config: &RunConfig, outputs: &[PathBuf], wall: f64) -> Result<Vec<u8>, CliError> {
    let files: Vec<String> = outputs
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let doc = json!({
        "experiment": config.experiment.name(),
        "cli_version": env!("CARGO_PKG_VERSION"),
        "core_version": dirac_qca_core::VERSION,
        "wall_time_s": wall,
        "outputs": files,
        "config": config,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}
