//! Sampler selection as a fixed decision tree over a user-supplied problem
//! profile, plus the per-iteration cost table for each algorithm.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{McmcError, Result};

/// Dimension above which a differentiable problem counts as high-dimensional.
pub const HIGH_DIM_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rwm,
    Gibbs,
    Mala,
    Hmc,
    Nuts,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Rwm => "rwm",
            Algorithm::Gibbs => "gibbs",
            Algorithm::Mala => "mala",
            Algorithm::Hmc => "hmc",
            Algorithm::Nuts => "nuts",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = McmcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rwm" => Ok(Algorithm::Rwm),
            "gibbs" => Ok(Algorithm::Gibbs),
            "mala" => Ok(Algorithm::Mala),
            "hmc" => Ok(Algorithm::Hmc),
            "nuts" => Ok(Algorithm::Nuts),
            other => Err(McmcError::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Augmentation {
    SurrogateDelayedAcceptance,
    MixtureProposal,
    EssTuning,
}

/// Every field is required: the tree branches on each of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProblemProfile {
    pub differentiable: bool,
    pub fcds_tractable: bool,
    pub dim: usize,
    pub high_correlation: bool,
    /// Prefers automation over hand tuning.
    pub needs_blackbox: bool,
    pub suspect_multimodal: bool,
    pub expensive_likelihood: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Recommendation {
    pub primary_choice: Algorithm,
    pub headline: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub justification: Vec<String>,
    pub suggested_augmentations: Vec<Augmentation>,
}

pub const MULTIMODAL_WARNING: &str = "WARNING";

pub fn recommend(profile: &ProblemProfile) -> Recommendation {
    let mut why = Vec::new();
    let (choice, headline) = if !profile.differentiable {
        why.push("target is not differentiable, so gradient samplers are ruled out".to_string());
        if profile.fcds_tractable {
            why.push("full conditionals can be drawn exactly; every Gibbs update is accepted".into());
            (Algorithm::Gibbs, "Use Gibbs Sampling.")
        } else {
            why.push(
                "full conditionals are not tractable; fall back to a gradient-free sampler \
                 (slice sampling is the usual alternative, not provided here)"
                    .into(),
            );
            why.push("expect slow mixing if the dimension is high or coordinates are correlated".into());
            (Algorithm::Rwm, "Use Random-Walk Metropolis (RWM)")
        }
    } else if profile.dim > HIGH_DIM_THRESHOLD || profile.high_correlation {
        if profile.dim > HIGH_DIM_THRESHOLD {
            why.push(format!(
                "dimension {} exceeds {HIGH_DIM_THRESHOLD}; random-walk proposals would need tiny steps",
                profile.dim
            ));
        } else {
            why.push("strong correlations call for gradient-guided trajectories".into());
        }
        if profile.needs_blackbox {
            why.push("automation requested: NUTS picks its trajectory length per iteration".into());
            (Algorithm::Nuts, "Use NUTS.")
        } else {
            why.push("hand tuning accepted: fixed-length HMC avoids tree-building overhead".into());
            (Algorithm::Hmc, "Use HMC.")
        }
    } else {
        why.push(format!(
            "dimension {} is at most {HIGH_DIM_THRESHOLD} and correlations are weak",
            profile.dim
        ));
        why.push("gradient cost per iteration may not be worth the statistical gain".into());
        (Algorithm::Rwm, "RWM is likely sufficient")
    };

    let mut augment = Vec::new();
    let warning = profile.suspect_multimodal.then(|| {
        augment.push(Augmentation::MixtureProposal);
        format!(
            "{MULTIMODAL_WARNING}: every sampler above is local and is expected to stay in the \
             first mode it finds; add a global mixture proposal"
        )
    });
    if profile.expensive_likelihood {
        augment.push(Augmentation::SurrogateDelayedAcceptance);
    }
    augment.push(Augmentation::EssTuning);

    Recommendation {
        primary_choice: choice,
        headline: headline.to_string(),
        warning,
        justification: why,
        suggested_augmentations: augment,
    }
}

/// One row of the per-iteration cost table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostDescriptor {
    pub algorithm: Algorithm,
    pub proposal: &'static str,
    pub requires_gradient: bool,
    pub time: &'static str,
    pub space: &'static str,
    pub mixing: &'static str,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// `steps` is the trajectory length and is required for HMC and NUTS.
pub fn predict_iteration_cost(choice: Algorithm, dim: usize, steps: Option<usize>) -> Result<CostDescriptor> {
    if matches!(choice, Algorithm::Hmc | Algorithm::Nuts) && steps.is_none() {
        return Err(McmcError::invalid(format!("{choice} cost needs a trajectory length")));
    }
    let (proposal, grad, time, space, mixing) = match choice {
        Algorithm::Rwm => ("q' ~ N(q, σ^2 I)", false, "O(C_f)", "O(d)", "Poor. O(d^2) or worse."),
        Algorithm::Gibbs => (
            "q_i ~ π(q_i | q_{-i})",
            false,
            "O(∑ C_FCD_i)",
            "O(d)",
            "Varies. Can be O(1) or O(d^2) depending on correlation",
        ),
        Algorithm::Mala => ("Discretized Langevin step", true, "O(C_g)", "O(d)", "Good. Better than RWM"),
        Algorithm::Hmc => (
            "Symplectic integrator (fixed L)",
            true,
            "O(L · C_g)",
            "O(d)",
            "Excellent. O(d) to O(d^{1/4})",
        ),
        Algorithm::Nuts => (
            "Symplectic integrator (dynamic L′)",
            true,
            "O(L′ · C_g)",
            "O(L′ · d)",
            "Excellent. O(d) to O(d^{1/4})",
        ),
    };
    Ok(CostDescriptor {
        algorithm: choice,
        proposal,
        requires_gradient: grad,
        time,
        space,
        mixing,
        dim,
        steps,
    })
}
