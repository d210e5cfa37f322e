use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, InitSpec, MassSpec, SamplerSpec, StepSize, AutoStep, WarmupSource};
use super::output::execute;
use crate::error::{McmcError, Result};
use crate::targets::{TargetConfig, TargetSpec};

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const BUNDLES: [&str; 3] = ["gap1_multimodal", "gap3_expensive", "gap4_tuning"];

/// One comparison row. Evaluation counters are included so every ratio
/// can be recomputed offline.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub sampler: String,
    pub n_chains: usize,
    pub n_samples: usize,
    pub step_size: Option<f64>,
    pub min_ess: f64,
    pub ess_per_step: f64,
    pub ess_per_true_eval: f64,
    pub ess_per_grad_eval: Option<f64>,
    pub acceptance: f64,
    pub esjd: f64,
    pub divergences: usize,
    pub max_rhat: Option<f64>,
    pub true_evals: u64,
    pub grad_evals: u64,
    pub surrogate_evals: u64,
    pub warmup_true_evals: u64,
    pub warmup_grad_evals: u64,
    /// Fraction of post-warmup samples with a positive first coordinate.
    pub mode_occupancy: Option<f64>,
    /// Sign changes of the first coordinate, summed over chains.
    pub mode_switches: Option<usize>,
    pub wall_time: f64,
}

/// Runs each config and tabulates one row per config. All configs must
/// share the target and the chain length.
pub fn run_comparison(configs: &[ExperimentConfig]) -> Result<Vec<ComparisonRow>> {
    let first = configs
        .first()
        .ok_or_else(|| McmcError::invalid("comparison needs at least one config"))?;
    for c in configs {
        if c.target.spec != first.target.spec {
            return Err(McmcError::invalid(format!(
                "config {:?} targets {:?}, expected {:?}",
                c.label(),
                c.target.spec,
                first.target.spec
            )));
        }
        if c.n_samples != first.n_samples {
            return Err(McmcError::invalid(format!(
                "config {:?} has n_samples {}, expected {}",
                c.label(),
                c.n_samples,
                first.n_samples
            )));
        }
    }
    let bimodal = matches!(first.target.spec, TargetSpec::BimodalMixture { .. });
    configs
        .iter()
        .map(|c| {
            let res = execute(c)?;
            let rep = &res.report;
            let (occupancy, switches) = if bimodal {
                let mut upper = 0usize;
                let mut switches = 0usize;
                let mut total = 0usize;
                for ch in &res.chains {
                    let col = ch.record.column(0);
                    upper += col.iter().filter(|v| **v > 0.0).count();
                    switches += col.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
                    total += col.len();
                }
                (Some(upper as f64 / total as f64), Some(switches))
            } else {
                (None, None)
            };
            Ok(ComparisonRow {
                label: c.label(),
                sampler: c.sampler.name().to_string(),
                n_chains: c.n_chains,
                n_samples: c.n_samples,
                step_size: rep.extras.get("step_size").copied(),
                min_ess: rep.min_ess,
                ess_per_step: rep.ess_per_step,
                ess_per_true_eval: rep.ess_per_true_eval,
                ess_per_grad_eval: rep.ess_per_grad_eval,
                acceptance: rep.acceptance_rate,
                esjd: rep.esjd,
                divergences: rep.n_divergences,
                max_rhat: rep.max_rhat(),
                true_evals: rep.counters.target,
                grad_evals: rep.counters.grad,
                surrogate_evals: rep.counters.surrogate,
                warmup_true_evals: rep.warmup_counters.target,
                warmup_grad_evals: rep.warmup_counters.grad,
                mode_occupancy: occupancy,
                mode_switches: switches,
                wall_time: res.wall_time,
            })
        })
        .collect()
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| McmcError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison(rows: &[ComparisonRow], dir: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(COMPARISON_FILE);
    write_comparison_csv(rows, std::fs::File::create(&path)?)?;
    Ok(path)
}

fn labeled(mut c: ExperimentConfig, label: &str) -> ExperimentConfig {
    c.label = Some(label.to_string());
    c
}

/// Named benchmark presets.
///
/// * `gap1_multimodal`: two-mode mixture started in the lower mode; RWM,
///   NUTS, the mixture independence sampler fitted from overdispersed
///   pilots, and the same sampler fitted from one trapped pilot.
/// * `gap3_expensive`: 2-d Gaussian with a per-evaluation busy delay;
///   RWM against surrogate delayed acceptance.
/// * `gap4_tuning`: 10-d Gaussian; a badly scaled fixed RWM, adapted and
///   ESS-tuned RWM, and adapted HMC and NUTS.
pub fn bundle(name: &str, seed: u64) -> Result<Vec<ExperimentConfig>> {
    let adapt = StepSize::Auto(AutoStep::Adapt);
    match name {
        "gap1_multimodal" => {
            let d = 100;
            let target = TargetSpec::BimodalMixture {
                d,
                separation: 8.0,
                weight: 0.5,
            };
            let base = |sampler| {
                let mut c = ExperimentConfig::new(target.clone(), sampler, seed);
                c.n_warmup = 1000;
                c.n_samples = 20_000;
                let mut start = vec![0.0; d];
                start[0] = -4.0;
                c.init = InitSpec::Point(start);
                c
            };
            let gmm = |source| SamplerSpec::GmmIndependence {
                k: 2,
                warmup_source: source,
                n_pilot_chains: 8,
                pilot_steps: 20_000,
                max_em_iter: 200,
                em_tol: 1e-8,
            };
            Ok(vec![
                base(SamplerSpec::Rwm { sigma: adapt }),
                base(SamplerSpec::Nuts {
                    epsilon: adapt,
                    max_tree_depth: 10,
                    mass: MassSpec::Adapt,
                }),
                base(gmm(WarmupSource::Overdispersed)),
                labeled(base(gmm(WarmupSource::SingleChain)), "gmm_independence_trapped"),
            ])
        }
        "gap3_expensive" => {
            let mut target = TargetConfig::new(TargetSpec::StandardGaussian { d: 2 });
            target.eval_delay_us = 20;
            let base = |sampler| {
                let mut c = ExperimentConfig::new(TargetSpec::StandardGaussian { d: 2 }, sampler, seed);
                c.target = target.clone();
                c.n_warmup = 1000;
                c.n_samples = 20_000;
                c.init = InitSpec::Named(super::config::InitMode::Origin);
                c
            };
            Ok(vec![
                base(SamplerSpec::Rwm { sigma: adapt }),
                base(SamplerSpec::DaRwm {
                    sigma: adapt,
                    bandwidth: 1.5,
                    ridge: 1e-6,
                    n_train: 200,
                    refine_rounds: 0,
                    refine_points: 20,
                    approximate: false,
                }),
            ])
        }
        "gap4_tuning" => {
            let base = |sampler| {
                let mut c = ExperimentConfig::new(TargetSpec::StandardGaussian { d: 10 }, sampler, seed);
                c.n_warmup = 1000;
                c.n_samples = 5000;
                c.init = InitSpec::Named(super::config::InitMode::Origin);
                c
            };
            Ok(vec![
                labeled(base(SamplerSpec::Rwm { sigma: StepSize::Fixed(2.0) }), "rwm_untuned"),
                labeled(base(SamplerSpec::Rwm { sigma: adapt }), "rwm_adapt"),
                labeled(
                    base(SamplerSpec::Rwm {
                        sigma: StepSize::Auto(AutoStep::Tune),
                    }),
                    "rwm_tune",
                ),
                base(SamplerSpec::Hmc {
                    epsilon: adapt,
                    n_leapfrog: 10,
                    mass: MassSpec::Identity,
                    jitter: 0.1,
                }),
                base(SamplerSpec::Nuts {
                    epsilon: adapt,
                    max_tree_depth: 10,
                    mass: MassSpec::Identity,
                }),
            ])
        }
        other => Err(McmcError::invalid(format!(
            "unknown bundle {other:?}; available: {}",
            BUNDLES.join(", ")
        ))),
    }
}
