//! A frozen transition kernel of any supported family, applied uniformly
//! by the experiment runner.

use crate::augment::{independence_proposal_step, DelayedAcceptance, MixtureProposal};
use crate::classic::{gibbs_step, rwm_step, FullConditionalSet, RwmConfig};
use crate::error::Result;
use crate::gradient::{hmc_step, mala_step, nuts_step, HmcConfig, NutsConfig};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

#[derive(Debug)]
pub enum Kernel {
    Rwm(RwmConfig),
    Mala { epsilon: f64 },
    Hmc(HmcConfig),
    Nuts(NutsConfig),
    /// Exact conditionals or Metropolis-within-Gibbs slots.
    Gibbs(FullConditionalSet),
    DelayedAcceptance(Box<DelayedAcceptance>),
    Independence(Box<MixtureProposal>),
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Rwm(_) => "rwm",
            Kernel::Mala { .. } => "mala",
            Kernel::Hmc(_) => "hmc",
            Kernel::Nuts(_) => "nuts",
            Kernel::Gibbs(_) => "gibbs",
            Kernel::DelayedAcceptance(_) => "da_rwm",
            Kernel::Independence(_) => "gmm_independence",
        }
    }

    pub fn uses_gradient(&self) -> bool {
        matches!(self, Kernel::Mala { .. } | Kernel::Hmc(_) | Kernel::Nuts(_))
    }

    pub fn step(
        &mut self,
        state: ChainState,
        target: &dyn TargetDensity,
        rng: &mut RngStream,
        counters: &mut EvalCounters,
    ) -> Result<Transition> {
        match self {
            Kernel::Rwm(c) => rwm_step(state, c, target, rng, counters),
            Kernel::Mala { epsilon } => mala_step(state, *epsilon, target, rng, counters),
            Kernel::Hmc(c) => hmc_step(state, c, target, rng, counters),
            Kernel::Nuts(c) => nuts_step(state, c, target, rng, counters),
            Kernel::Gibbs(f) => gibbs_step(state, f, target, rng, counters),
            Kernel::DelayedAcceptance(da) => da.step(state, target, rng, counters),
            Kernel::Independence(m) => independence_proposal_step(state, m, target, rng, counters),
        }
    }

    /// Hash of every fixed kernel parameter. Running statistics (stage
    /// counts, slot acceptance tallies) are excluded, so the value stays
    /// constant while a frozen kernel is applied.
    pub fn fingerprint(&self) -> u64 {
        let mut params: Vec<f64> = Vec::new();
        let tag = match self {
            Kernel::Rwm(c) => {
                params.push(c.sigma);
                1.0
            }
            Kernel::Mala { epsilon } => {
                params.push(*epsilon);
                2.0
            }
            Kernel::Hmc(c) => {
                params.push(c.epsilon);
                params.push(c.n_leapfrog as f64);
                params.push(c.jitter);
                params.extend_from_slice(&c.mass_diag);
                3.0
            }
            Kernel::Nuts(c) => {
                params.push(c.epsilon);
                params.push(c.max_tree_depth as f64);
                params.extend_from_slice(&c.mass_diag);
                4.0
            }
            Kernel::Gibbs(f) => {
                params = f.parameters();
                5.0
            }
            Kernel::DelayedAcceptance(da) => {
                params.push(da.inner.sigma);
                params.push(f64::from_bits(da.surrogate.fingerprint()));
                params.push(da.approximate as u8 as f64);
                6.0
            }
            Kernel::Independence(m) => {
                params.push(f64::from_bits(m.fingerprint()));
                7.0
            }
        };
        crate::augment::fingerprint_f64s(std::iter::once(&tag).chain(params.iter()))
    }
}
