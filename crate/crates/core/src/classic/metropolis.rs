use serde::{Deserialize, Serialize};

use crate::error::{McmcError, Result};
use crate::mh::{accept_or_reject, mh_accept_log_prob};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

/// Isotropic random-walk proposal scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwmConfig {
    pub sigma: f64,
}

impl RwmConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(McmcError::invalid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(RwmConfig { sigma })
    }
}

/// A proposal kernel `g(x'|x)` with a computable log-density.
pub trait Proposal {
    fn sample(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64>;

    /// `log g(to | from)` up to a constant shared by both directions.
    fn log_density(&self, to: &[f64], from: &[f64]) -> f64;
}

/// `x' ~ N(x, sigma^2 I)`.
#[derive(Debug, Clone, Copy)]
pub struct RandomWalk {
    pub sigma: f64,
}

impl Proposal for RandomWalk {
    fn sample(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        from.iter().map(|x| x + self.sigma * rng.normal()).collect()
    }

    fn log_density(&self, to: &[f64], from: &[f64]) -> f64 {
        let ss: f64 = to.iter().zip(from).map(|(a, b)| (a - b) * (a - b)).sum();
        -ss / (2.0 * self.sigma * self.sigma)
    }
}

/// One generic Metropolis-Hastings transition: propose, correct with the
/// Hastings ratio, accept or reject.
pub fn mh_step<P: Proposal + ?Sized>(
    state: ChainState,
    proposal: &P,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    let candidate = proposal.sample(&state.position, rng);
    if let Some(index) = candidate.iter().position(|v| !v.is_finite()) {
        return Err(McmcError::Proposal { index });
    }
    let logg_fwd = proposal.log_density(&candidate, &state.position);
    let logg_bwd = proposal.log_density(&state.position, &candidate);
    let logpi_prop = counters.log_density(target, &candidate);
    let log_alpha = mh_accept_log_prob(state.cached_logpi, logpi_prop, logg_fwd, logg_bwd)?;
    finish(state, candidate, logpi_prop, log_alpha, rng)
}

/// Random-walk Metropolis: symmetric Gaussian proposal, so both proposal
/// log-densities are taken as zero.
pub fn rwm_step(
    state: ChainState,
    config: &RwmConfig,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    let candidate: Vec<f64> = state
        .position
        .iter()
        .map(|x| x + config.sigma * rng.normal())
        .collect();
    let logpi_prop = counters.log_density(target, &candidate);
    let log_alpha = mh_accept_log_prob(state.cached_logpi, logpi_prop, 0.0, 0.0)?;
    finish(state, candidate, logpi_prop, log_alpha, rng)
}

pub(crate) fn finish(
    state: ChainState,
    candidate: Vec<f64>,
    logpi_prop: f64,
    log_alpha: f64,
    rng: &mut RngStream,
) -> Result<Transition> {
    let accept_prob = log_alpha.exp();
    if log_alpha == f64::NEG_INFINITY {
        // Still consume the uniform so the draw count per step is fixed.
        let (next, _) = accept_or_reject(state.clone(), state, log_alpha, rng);
        return Ok(Transition::simple(next, false, 0.0));
    }
    let proposal = ChainState {
        position: candidate,
        cached_logpi: logpi_prop,
        cached_grad: None,
        step_index: state.step_index,
    };
    let (next, accepted) = accept_or_reject(state, proposal, log_alpha, rng);
    Ok(Transition::simple(next, accepted, accept_prob))
}
