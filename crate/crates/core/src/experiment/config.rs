use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{McmcError, Result};
use crate::gradient::MAX_TREE_DEPTH_LIMIT;
use crate::targets::{TargetConfig, TargetSpec};

/// Schema id written to every manifest and required in config files.
pub const SCHEMA_ID: &str = "mcmc-experiment/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoStep {
    /// Dual averaging during warmup.
    Adapt,
    /// ESS-driven pilot search before warmup.
    Tune,
}

/// A step size (RWM scale or integrator step): either a number or one of
/// `"adapt"` and `"tune"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Fixed(f64),
    Auto(AutoStep),
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Auto(AutoStep::Adapt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSpec {
    Identity,
    #[default]
    Adapt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmupSource {
    /// Several RWM chains started across the target's check box.
    #[default]
    Overdispersed,
    /// One RWM chain from this chain's own starting point.
    SingleChain,
}

fn default_leapfrog() -> usize {
    10
}
fn default_depth() -> usize {
    10
}
fn default_one() -> f64 {
    1.0
}
fn default_bandwidth() -> f64 {
    1.5
}

fn default_jitter() -> f64 {
    0.1
}

fn default_ridge() -> f64 {
    1e-6
}
fn default_train() -> usize {
    200
}
fn default_refine_points() -> usize {
    20
}
fn default_k() -> usize {
    2
}
fn default_pilots() -> usize {
    8
}
fn default_pilot_steps() -> usize {
    2000
}
fn default_em_iter() -> usize {
    200
}
fn default_em_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SamplerSpec {
    Rwm {
        #[serde(default)]
        sigma: StepSize,
    },
    Mala {
        #[serde(default)]
        epsilon: StepSize,
    },
    Hmc {
        #[serde(default)]
        epsilon: StepSize,
        #[serde(default = "default_leapfrog")]
        n_leapfrog: usize,
        #[serde(default)]
        mass: MassSpec,
        /// Relative step-size jitter per transition.
        #[serde(default = "default_jitter")]
        jitter: f64,
    },
    Nuts {
        #[serde(default)]
        epsilon: StepSize,
        #[serde(default = "default_depth")]
        max_tree_depth: usize,
        #[serde(default)]
        mass: MassSpec,
    },
    /// Exact Gaussian full conditionals.
    Gibbs {},
    /// Metropolis-within-Gibbs with a fixed per-coordinate scale.
    Mwg {
        #[serde(default = "default_one")]
        sigma: f64,
    },
    DaRwm {
        #[serde(default)]
        sigma: StepSize,
        #[serde(default = "default_bandwidth")]
        bandwidth: f64,
        #[serde(default = "default_ridge")]
        ridge: f64,
        #[serde(default = "default_train")]
        n_train: usize,
        #[serde(default)]
        refine_rounds: usize,
        #[serde(default = "default_refine_points")]
        refine_points: usize,
        /// Skip the exact second stage and sample the surrogate instead.
        #[serde(default)]
        approximate: bool,
    },
    GmmIndependence {
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default)]
        warmup_source: WarmupSource,
        #[serde(default = "default_pilots")]
        n_pilot_chains: usize,
        /// RWM steps per pilot chain. A single-chain warmup runs all of them in one chain.
        #[serde(default = "default_pilot_steps")]
        pilot_steps: usize,
        #[serde(default = "default_em_iter")]
        max_em_iter: usize,
        #[serde(default = "default_em_tol")]
        em_tol: f64,
    },
}

impl SamplerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::Rwm { .. } => "rwm",
            SamplerSpec::Mala { .. } => "mala",
            SamplerSpec::Hmc { .. } => "hmc",
            SamplerSpec::Nuts { .. } => "nuts",
            SamplerSpec::Gibbs {} => "gibbs",
            SamplerSpec::Mwg { .. } => "mwg",
            SamplerSpec::DaRwm { .. } => "da_rwm",
            SamplerSpec::GmmIndependence { .. } => "gmm_independence",
        }
    }

    /// The tunable step size, if this sampler has one.
    pub fn step_size(&self) -> Option<StepSize> {
        match self {
            SamplerSpec::Rwm { sigma } | SamplerSpec::DaRwm { sigma, .. } => Some(*sigma),
            SamplerSpec::Mala { epsilon } | SamplerSpec::Hmc { epsilon, .. } | SamplerSpec::Nuts { epsilon, .. } => {
                Some(*epsilon)
            }
            _ => None,
        }
    }

    pub fn default_target_accept(&self) -> f64 {
        use crate::adaptation::target_accept;
        match self {
            SamplerSpec::Mala { .. } => target_accept::MALA,
            SamplerSpec::Hmc { .. } => target_accept::HMC,
            SamplerSpec::Nuts { .. } => target_accept::NUTS,
            _ => target_accept::RWM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    /// Overrides the sampler's default acceptance target.
    #[serde(default)]
    pub target_accept: Option<f64>,
    #[serde(default = "AdaptConfig::default_gamma")]
    pub gamma: f64,
    #[serde(default = "AdaptConfig::default_t0")]
    pub t0: f64,
    #[serde(default = "AdaptConfig::default_kappa")]
    pub kappa: f64,
    #[serde(default = "AdaptConfig::default_initial")]
    pub initial_fraction: f64,
    #[serde(default = "AdaptConfig::default_final")]
    pub final_fraction: f64,
    /// Pilot runs when a step size is set to "tune".
    #[serde(default = "AdaptConfig::default_budget")]
    pub tune_budget: usize,
    /// Steps per tuning pilot; short pilots make the ESS comparison noisy.
    #[serde(default = "AdaptConfig::default_pilot")]
    pub tune_pilot_length: usize,
}

impl AdaptConfig {
    fn default_gamma() -> f64 {
        0.05
    }
    fn default_t0() -> f64 {
        10.0
    }
    fn default_kappa() -> f64 {
        0.75
    }
    fn default_initial() -> f64 {
        0.15
    }
    fn default_final() -> f64 {
        0.25
    }
    fn default_budget() -> usize {
        16
    }
    fn default_pilot() -> usize {
        10_000
    }
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            target_accept: None,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            initial_fraction: 0.15,
            final_fraction: 0.25,
            tune_budget: 16,
            tune_pilot_length: 10_000,
        }
    }
}

/// Starting point: an explicit vector or one of `"origin"` and
/// `"overdispersed"` (the default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    Point(Vec<f64>),
    Named(InitMode),
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Named(InitMode::Overdispersed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    Origin,
    /// Uniform draw over the target's check box, per chain.
    Overdispersed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn default_schema() -> String {
    SCHEMA_ID.to_string()
}
fn default_chains() -> usize {
    1
}
fn default_warmup() -> usize {
    1000
}
fn default_samples() -> usize {
    1000
}
fn default_output() -> PathBuf {
    PathBuf::from("mcmc-out")
}
fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    /// Row label in comparisons; defaults to the sampler name.
    #[serde(default)]
    pub label: Option<String>,
    pub seed: u64,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    #[serde(default = "default_warmup")]
    pub n_warmup: usize,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub write_samples: bool,
    #[serde(default)]
    pub require_rhat: bool,
    /// Concurrent chains; 0 uses every core, 1 runs sequentially.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub init: InitSpec,
    pub target: TargetConfig,
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub adapt: AdaptConfig,
}

impl ExperimentConfig {
    pub fn new(target: TargetSpec, sampler: SamplerSpec, seed: u64) -> Self {
        ExperimentConfig {
            schema: SCHEMA_ID.to_string(),
            label: None,
            seed,
            n_chains: 1,
            n_warmup: default_warmup(),
            n_samples: default_samples(),
            output_dir: default_output(),
            formats: default_formats(),
            write_samples: false,
            require_rhat: false,
            workers: 0,
            init: InitSpec::default(),
            target: TargetConfig::new(target),
            sampler,
            adapt: AdaptConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| McmcError::Validation(vec![e.message().to_string()]))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| McmcError::Io(e.to_string()))
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.sampler.name().to_string())
    }

    pub fn target_accept(&self) -> f64 {
        self.adapt
            .target_accept
            .unwrap_or_else(|| self.sampler.default_target_accept())
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.schema != SCHEMA_ID {
            errs.push(format!("schema: expected {SCHEMA_ID:?}, got {:?}", self.schema));
        }
        if self.n_samples < 4 {
            errs.push(format!("n_samples: must be at least 4, got {}", self.n_samples));
        }
        if self.n_chains < 1 {
            errs.push("n_chains: must be at least 1".to_string());
        }
        if self.require_rhat && self.n_chains < 2 {
            errs.push(format!(
                "require_rhat: R-hat needs n_chains >= 2, got {}",
                self.n_chains
            ));
        }
        if self.formats.is_empty() {
            errs.push("formats: at least one report format is required".to_string());
        }
        validate_target(&self.target.spec, &mut errs);
        let dim = self.target.spec.dim();
        if let InitSpec::Point(p) = &self.init {
            if p.len() != dim {
                errs.push(format!("init: point has length {}, target dimension is {dim}", p.len()));
            }
            if p.iter().any(|v| !v.is_finite()) {
                errs.push("init: point must be finite".to_string());
            }
        }
        self.validate_sampler(&mut errs);
        let a = &self.adapt;
        if let Some(t) = a.target_accept {
            if !(t > 0.0 && t < 1.0) {
                errs.push(format!("adapt.target_accept: must lie in (0, 1), got {t}"));
            }
        }
        if !(a.gamma > 0.0) {
            errs.push("adapt.gamma: must be positive".to_string());
        }
        if !(a.t0 > 0.0) {
            errs.push("adapt.t0: must be positive".to_string());
        }
        if !(a.kappa > 0.5 && a.kappa <= 1.0) {
            errs.push(format!("adapt.kappa: must lie in (0.5, 1], got {}", a.kappa));
        }
        if !(a.initial_fraction >= 0.0 && a.final_fraction >= 0.0 && a.initial_fraction + a.final_fraction <= 1.0) {
            errs.push("adapt: initial_fraction and final_fraction must be nonnegative and sum to at most 1".to_string());
        }
        if a.tune_budget < 2 {
            errs.push("adapt.tune_budget: must be at least 2".to_string());
        }
        if a.tune_pilot_length < 20 {
            errs.push("adapt.tune_pilot_length: must be at least 20".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McmcError::Validation(errs))
        }
    }

    fn validate_sampler(&self, errs: &mut Vec<String>) {
        let step = self.sampler.step_size();
        match step {
            Some(StepSize::Fixed(v)) if !(v > 0.0 && v.is_finite()) => {
                errs.push(format!("sampler: step size must be positive, got {v}"));
            }
            Some(StepSize::Auto(AutoStep::Adapt)) if self.n_warmup < 10 => {
                errs.push(format!(
                    "n_warmup: step-size adaptation needs at least 10 warmup steps, got {}",
                    self.n_warmup
                ));
            }
            Some(StepSize::Auto(AutoStep::Tune))
                if !matches!(
                    self.sampler,
                    SamplerSpec::Rwm { .. } | SamplerSpec::Mala { .. } | SamplerSpec::Hmc { .. }
                ) =>
            {
                errs.push(format!("sampler: \"tune\" is not supported for {}", self.sampler.name()));
            }
            _ => {}
        }
        match &self.sampler {
            SamplerSpec::Hmc { n_leapfrog, mass, jitter, .. } => {
                if *n_leapfrog == 0 {
                    errs.push("sampler.n_leapfrog: must be at least 1".to_string());
                }
                if !(0.0..1.0).contains(jitter) {
                    errs.push(format!("sampler.jitter: must lie in [0, 1), got {jitter}"));
                }
                if *mass == MassSpec::Adapt && self.n_warmup < 20 {
                    errs.push("sampler.mass: adaptation needs at least 20 warmup steps".to_string());
                }
            }
            SamplerSpec::Nuts {
                max_tree_depth, mass, ..
            } => {
                if *max_tree_depth == 0 || *max_tree_depth > MAX_TREE_DEPTH_LIMIT {
                    errs.push(format!(
                        "sampler.max_tree_depth: must lie in 1..={MAX_TREE_DEPTH_LIMIT}, got {max_tree_depth}"
                    ));
                }
                if *mass == MassSpec::Adapt && self.n_warmup < 20 {
                    errs.push("sampler.mass: adaptation needs at least 20 warmup steps".to_string());
                }
            }
            SamplerSpec::Gibbs {} => {
                let exact = matches!(
                    self.target.spec,
                    TargetSpec::StandardGaussian { .. }
                        | TargetSpec::DiagonalGaussian { .. }
                        | TargetSpec::Ar1Gaussian { .. }
                );
                if !exact {
                    errs.push("sampler: gibbs needs a Gaussian target with exact conditionals; use mwg".to_string());
                }
            }
            SamplerSpec::Mwg { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    errs.push(format!("sampler.sigma: must be positive, got {sigma}"));
                }
            }
            SamplerSpec::DaRwm {
                bandwidth,
                ridge,
                n_train,
                refine_rounds,
                approximate,
                ..
            } => {
                if !(*bandwidth > 0.0) {
                    errs.push("sampler.bandwidth: must be positive".to_string());
                }
                if !(*ridge > 0.0) {
                    errs.push("sampler.ridge: must be positive".to_string());
                }
                if *n_train < 2 {
                    errs.push("sampler.n_train: must be at least 2".to_string());
                }
                if *approximate && *refine_rounds > 0 {
                    errs.push("sampler.refine_rounds: refinement needs exact mode (approximate = false)".to_string());
                }
            }
            SamplerSpec::GmmIndependence {
                k,
                n_pilot_chains,
                pilot_steps,
                max_em_iter,
                ..
            } => {
                if *pilot_steps < 20 {
                    errs.push("sampler.pilot_steps: must be at least 20".to_string());
                }
                if *k == 0 {
                    errs.push("sampler.k: must be at least 1".to_string());
                }
                if *n_pilot_chains == 0 {
                    errs.push("sampler.n_pilot_chains: must be at least 1".to_string());
                }
                if *max_em_iter == 0 {
                    errs.push("sampler.max_em_iter: must be at least 1".to_string());
                }
                if self.n_warmup < 20 * k.max(&1) {
                    errs.push(format!(
                        "n_warmup: mixture fitting needs at least {} warmup steps",
                        20 * k.max(&1)
                    ));
                }
            }
            _ => {}
        }
    }
}

fn validate_target(spec: &TargetSpec, errs: &mut Vec<String>) {
    match spec {
        TargetSpec::StandardGaussian { d } | TargetSpec::Funnel { d } => {
            if *d == 0 {
                errs.push("target.d: must be at least 1".to_string());
            }
            if matches!(spec, TargetSpec::Funnel { d } if *d < 2) {
                errs.push("target.d: funnel needs at least 2 dimensions".to_string());
            }
        }
        TargetSpec::Ar1Gaussian { d, rho } => {
            if *d == 0 {
                errs.push("target.d: must be at least 1".to_string());
            }
            if !(rho.abs() < 1.0) {
                errs.push(format!("target.rho: must lie in (-1, 1), got {rho}"));
            }
        }
        TargetSpec::DiagonalGaussian { variances } => {
            if variances.is_empty() || variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                errs.push("target.variances: must be a nonempty list of positive numbers".to_string());
            }
        }
        TargetSpec::Banana {} => {}
        TargetSpec::BimodalMixture { d, separation, weight } => {
            if *d == 0 {
                errs.push("target.d: must be at least 1".to_string());
            }
            if !(*separation > 0.0 && separation.is_finite()) {
                errs.push("target.separation: must be positive".to_string());
            }
            if !(*weight > 0.0 && *weight < 1.0) {
                errs.push(format!("target.weight: must lie in (0, 1), got {weight}"));
            }
        }
    }
}
