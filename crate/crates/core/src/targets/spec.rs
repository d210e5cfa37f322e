use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::Result;

/// Target addressed by name in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TargetSpec {
    StandardGaussian { d: usize },
    DiagonalGaussian { variances: Vec<f64> },
    Ar1Gaussian { d: usize, rho: f64 },
    Funnel { d: usize },
    Banana {},
    BimodalMixture {
        d: usize,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default = "default_weight")]
        weight: f64,
    },
}

fn default_separation() -> f64 {
    8.0
}

fn default_weight() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetConfig {
    #[serde(flatten)]
    pub spec: TargetSpec,
    /// Busy-wait per true evaluation, in microseconds.
    #[serde(default)]
    pub eval_delay_us: u64,
}

impl TargetSpec {
    pub fn build(&self) -> Result<Box<dyn TargetDensity>> {
        Ok(match self {
            TargetSpec::StandardGaussian { d } => Box::new(StandardGaussian::new(*d)?),
            TargetSpec::DiagonalGaussian { variances } => {
                Box::new(DiagonalGaussian::new(variances.clone())?)
            }
            TargetSpec::Ar1Gaussian { d, rho } => Box::new(Ar1Gaussian::new(*d, *rho)?),
            TargetSpec::Funnel { d } => Box::new(Funnel::new(*d)?),
            TargetSpec::Banana {} => Box::new(Banana),
            TargetSpec::BimodalMixture {
                d,
                separation,
                weight,
            } => Box::new(BimodalMixture::new(*d, *separation, *weight)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::StandardGaussian { d }
            | TargetSpec::Ar1Gaussian { d, .. }
            | TargetSpec::Funnel { d }
            | TargetSpec::BimodalMixture { d, .. } => *d,
            TargetSpec::DiagonalGaussian { variances } => variances.len(),
            TargetSpec::Banana {} => 2,
        }
    }
}

impl TargetConfig {
    pub fn new(spec: TargetSpec) -> Self {
        TargetConfig {
            spec,
            eval_delay_us: 0,
        }
    }

    pub fn build(&self) -> Result<Box<dyn TargetDensity>> {
        let inner = self.spec.build()?;
        if self.eval_delay_us == 0 {
            Ok(inner)
        } else {
            Ok(Box::new(Expensive::new(
                inner,
                Duration::from_micros(self.eval_delay_us),
            )))
        }
    }
}
