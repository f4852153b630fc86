//! Configuration, experiment runners and deterministic output for `gcl-sim`.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runners;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{parse_config, Experiment, ExperimentConfig, FamilyName};
pub use error::CliError;
pub use output::{RunOutput, Table};
pub use runners::run_experiment;

/// One `gcl-sim run` invocation.
#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub config: PathBuf,
    /// Replaces `output.dir`.
    pub out: Option<PathBuf>,
    pub threads: usize,
    /// Restricts the run to one family.
    pub family: Option<FamilyName>,
    /// `key.path=value` assignments applied on top of the file.
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub output: RunOutput,
}

/// Load the config, run it and write the outputs. Files are written even when
/// some points fail; the error then carries the partial or failed status.
pub fn execute(req: &RunRequest) -> Result<RunFiles, CliError> {
    let text = std::fs::read_to_string(&req.config).map_err(|e| CliError::io(&req.config, e))?;
    let mut overrides = req.overrides.clone();
    if let Some(f) = req.family {
        overrides.push(format!("families = [\"{}\"]", f.label()));
    }
    let mut cfg = parse_config(&text, &overrides)?;
    if let Some(dir) = &req.out {
        cfg.output.dir = dir.clone();
    }
    log::info!("running {} for {:?}", cfg.experiment, cfg.families.iter().map(|f| f.label()).collect::<Vec<_>>());
    let start = Instant::now();
    let out = run_experiment(&cfg, req.threads)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (csv, json) = output::write_outputs(&cfg.output.dir, &cfg, &out, elapsed)?;
    log::info!("wrote {} and {} in {elapsed:.1} s", csv.display(), json.display());
    match out.status() {
        "complete" => Ok(RunFiles { csv, json, output: out }),
        "failed" => Err(CliError::Numerical(
            out.failures.first().map(|f| f.message.clone()).unwrap_or_else(|| "no point succeeded".into()),
        )),
        _ => Err(CliError::Partial { failed: out.failed_points(), total: out.points }),
    }
}
