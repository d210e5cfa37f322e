use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{ExperimentConfig, ReportFormat, SCHEMA_ID};
use super::runner::{run_chains, AdaptedParams, ChainOutput};
use crate::diagnostics::{build_report, DiagnosticsReport};
use crate::error::{McmcError, Result};
use crate::targets::TargetDensity;

pub const SAMPLES_FILE: &str = "samples.csv";
pub const DIAGNOSTICS_JSON: &str = "diagnostics.json";
pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "run-manifest.json";

/// In-memory result of an experiment.
#[derive(Debug)]
pub struct RunResult {
    pub report: DiagnosticsReport,
    pub chains: Vec<ChainOutput>,
    pub wall_time: f64,
}

/// Validates the config and runs every chain without touching the disk.
pub fn execute(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let target = config.target.build()?;
    execute_on(config, target.as_ref())
}

pub(crate) fn execute_on(config: &ExperimentConfig, target: &dyn TargetDensity) -> Result<RunResult> {
    let started = Instant::now();
    let chains = run_chains(config, target)?;
    let records: Vec<_> = chains.iter().map(|c| c.record.clone()).collect();
    let report = build_report(&records, target)?;
    Ok(RunResult {
        report,
        chains,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct ChainManifest<'a> {
    chain: usize,
    stream_id: usize,
    kernel_fingerprint: String,
    adapted: &'a AdaptedParams,
    wall_time: f64,
}

/// Full record of how a run was produced. Timing fields live only here,
/// so the diagnostics files stay byte-reproducible.
#[derive(Serialize)]
struct RunManifest<'a> {
    schema: &'static str,
    version: &'static str,
    parallel_feature: bool,
    seed: u64,
    config: &'a ExperimentConfig,
    chains: Vec<ChainManifest<'a>>,
    outputs: Vec<String>,
    created_unix: u64,
    wall_time: f64,
}

#[derive(Debug)]
pub struct RunOutputs {
    pub result: RunResult,
    pub files: Vec<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> McmcError {
    McmcError::Io(format!("{}: {e}", path.display()))
}

fn write_samples(path: &Path, chains: &[ChainOutput]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let dim = chains.first().map_or(0, |c| c.record.dim());
    let mut header = vec!["chain".to_string(), "iteration".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(["log_density".to_string(), "accepted".to_string()]);
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for c in chains {
        for t in 0..c.record.len() {
            let mut row = vec![c.chain.to_string(), t.to_string()];
            row.extend(c.record.row(t).iter().map(|v| v.to_string()));
            row.push(c.record.log_density[t].to_string());
            row.push((c.record.accept_flags[t] as u8).to_string());
            w.write_record(&row).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Runs the experiment and writes the diagnostics (JSON and/or CSV), the
/// optional samples file and the manifest into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutputs> {
    let result = execute(config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    if config.formats.contains(&ReportFormat::Json) {
        let path = dir.join(DIAGNOSTICS_JSON);
        fs::write(&path, result.report.to_json()? + "\n").map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    if config.formats.contains(&ReportFormat::Csv) {
        let path = dir.join(DIAGNOSTICS_CSV);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        result.report.write_csv(file)?;
        files.push(path);
    }
    if config.write_samples {
        let path = dir.join(SAMPLES_FILE);
        write_samples(&path, &result.chains)?;
        files.push(path);
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = RunManifest {
        schema: SCHEMA_ID,
        version: env!("CARGO_PKG_VERSION"),
        parallel_feature: crate::parallel::parallel_enabled(),
        seed: config.seed,
        config,
        chains: result
            .chains
            .iter()
            .map(|c| ChainManifest {
                chain: c.chain,
                stream_id: c.chain,
                kernel_fingerprint: format!("{:016x}", c.kernel_fingerprint),
                adapted: &c.adapted,
                wall_time: c.record.wall_time,
            })
            .collect(),
        outputs: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_time: result.wall_time,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| McmcError::Io(e.to_string()))?;
    fs::write(&manifest_path, text + "\n").map_err(|e| io_err(&manifest_path, e))?;
    files.push(manifest_path);
    Ok(RunOutputs { result, files })
}
