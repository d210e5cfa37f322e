use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::execute;
use crate::error::{McmcError, Result};
use crate::targets::TargetSpec;

pub const SCALING_FILE: &str = "scaling.csv";

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub sampler: String,
    pub d: usize,
    pub step_size: Option<f64>,
    pub acceptance: f64,
    pub min_ess: f64,
    pub ess_per_step: f64,
    pub target_evals: u64,
    pub grad_evals: u64,
    /// ESS/step relative to the first sampler at the same dimension.
    pub ess_per_step_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub sampler: String,
    /// Least-squares slope of log step size on log d; needs three or more
    /// dimensions.
    pub step_size_slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    pub summaries: Vec<ScalingSummary>,
}

/// Least-squares slope of `log y` on `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 3 || xs.len() != ys.len() || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn with_dim(spec: &TargetSpec, d: usize) -> Result<TargetSpec> {
    Ok(match spec {
        TargetSpec::StandardGaussian { .. } => TargetSpec::StandardGaussian { d },
        TargetSpec::Ar1Gaussian { rho, .. } => TargetSpec::Ar1Gaussian { d, rho: *rho },
        TargetSpec::Funnel { .. } => TargetSpec::Funnel { d },
        TargetSpec::BimodalMixture { separation, weight, .. } => TargetSpec::BimodalMixture {
            d,
            separation: *separation,
            weight: *weight,
        },
        other => return Err(McmcError::invalid(format!("target {other:?} has a fixed dimension"))),
    })
}

/// Runs every base config at every dimension in `dims` (ascending, each at
/// least 1). The first config is the reference for the ratio column.
pub fn run_scaling_study(bases: &[ExperimentConfig], dims: &[usize]) -> Result<ScalingStudy> {
    if bases.is_empty() {
        return Err(McmcError::invalid("scaling study needs at least one config"));
    }
    if dims.is_empty() || dims.contains(&0) || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(McmcError::invalid("dims must be strictly ascending and at least 1"));
    }
    let mut rows = Vec::new();
    let mut reference: Vec<f64> = Vec::new();
    let mut summaries = Vec::new();
    for (b, base) in bases.iter().enumerate() {
        let mut steps = Vec::new();
        for (j, &d) in dims.iter().enumerate() {
            let mut c = base.clone();
            c.target.spec = with_dim(&base.target.spec, d)?;
            if let super::config::InitSpec::Point(_) = c.init {
                c.init = super::config::InitSpec::Named(super::config::InitMode::Origin);
            }
            let res = execute(&c)?;
            let rep = &res.report;
            let step = rep.extras.get("step_size").copied();
            steps.push(step);
            if b == 0 {
                reference.push(rep.ess_per_step);
            }
            rows.push(ScalingRow {
                sampler: c.label(),
                d,
                step_size: step,
                acceptance: rep.acceptance_rate,
                min_ess: rep.min_ess,
                ess_per_step: rep.ess_per_step,
                target_evals: rep.counters.target,
                grad_evals: rep.counters.grad,
                ess_per_step_ratio: (bases.len() > 1).then(|| rep.ess_per_step / reference[j]),
            });
        }
        let xs: Vec<f64> = dims.iter().map(|d| *d as f64).collect();
        let slope = if steps.iter().all(|s| s.is_some()) {
            let ys: Vec<f64> = steps.iter().map(|s| s.unwrap_or(0.0)).collect();
            log_log_slope(&xs, &ys)
        } else {
            None
        };
        summaries.push(ScalingSummary {
            sampler: base.label(),
            step_size_slope: slope,
        });
    }
    Ok(ScalingStudy { rows, summaries })
}

#[derive(Serialize)]
struct CsvLine<'a> {
    sampler: &'a str,
    d: String,
    step_size: Option<f64>,
    acceptance: Option<f64>,
    min_ess: Option<f64>,
    ess_per_step: Option<f64>,
    target_evals: Option<u64>,
    grad_evals: Option<u64>,
    ess_per_step_ratio: Option<f64>,
    step_size_slope: Option<f64>,
}

impl ScalingStudy {
    /// Per-dimension rows followed by one summary row per sampler with
    /// `d = "all"` and the slope filled.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| McmcError::Io(e.to_string());
        for r in &self.rows {
            w.serialize(CsvLine {
                sampler: &r.sampler,
                d: r.d.to_string(),
                step_size: r.step_size,
                acceptance: Some(r.acceptance),
                min_ess: Some(r.min_ess),
                ess_per_step: Some(r.ess_per_step),
                target_evals: Some(r.target_evals),
                grad_evals: Some(r.grad_evals),
                ess_per_step_ratio: r.ess_per_step_ratio,
                step_size_slope: None,
            })
            .map_err(err)?;
        }
        for s in &self.summaries {
            w.serialize(CsvLine {
                sampler: &s.sampler,
                d: "all".to_string(),
                step_size: None,
                acceptance: None,
                min_ess: None,
                ess_per_step: None,
                target_evals: None,
                grad_evals: None,
                ess_per_step_ratio: None,
                step_size_slope: s.step_size_slope,
            })
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(SCALING_FILE);
        self.write_csv(std::fs::File::create(&path)?)?;
        Ok(path)
    }
}
