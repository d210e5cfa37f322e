use serde::{Deserialize, Serialize};

use super::integrator::{kinetic_energy, leapfrog, PhasePoint};
use super::{ensure_grad, DIVERGENCE_THRESHOLD};
use crate::error::{McmcError, Result};
use crate::mh::accept_or_reject;
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    pub epsilon: f64,
    pub n_leapfrog: usize,
    pub mass_diag: Vec<f64>,
    /// Each transition draws its step size uniformly from
    /// `epsilon * [1 - jitter, 1 + jitter]`; breaks the periodic
    /// trajectories fixed-length HMC falls into on near-isotropic targets.
    #[serde(default)]
    pub jitter: f64,
}

impl HmcConfig {
    pub fn new(epsilon: f64, n_leapfrog: usize, mass_diag: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(McmcError::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if n_leapfrog == 0 {
            return Err(McmcError::invalid("n_leapfrog must be at least 1"));
        }
        if mass_diag.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(McmcError::invalid("mass entries must be positive"));
        }
        Ok(HmcConfig {
            epsilon,
            n_leapfrog,
            mass_diag,
            jitter: 0.0,
        })
    }

    pub fn with_jitter(mut self, jitter: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&jitter) {
            return Err(McmcError::invalid(format!("jitter must lie in [0, 1), got {jitter}")));
        }
        self.jitter = jitter;
        Ok(self)
    }
}

/// One HMC transition: fresh momentum `p ~ N(0, M)`, `L` leapfrog steps,
/// momentum flip, Metropolis correction on the energy change.
pub fn hmc_step(
    mut state: ChainState,
    config: &HmcConfig,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    ensure_grad(&mut state, target, counters)?;
    let epsilon = if config.jitter > 0.0 {
        config.epsilon * (1.0 + config.jitter * (2.0 * rng.uniform() - 1.0))
    } else {
        config.epsilon
    };
    let p: Vec<f64> = config.mass_diag.iter().map(|m| m.sqrt() * rng.normal()).collect();
    let h0 = -state.cached_logpi + kinetic_energy(&p, &config.mass_diag);
    let start = PhasePoint::new(state.position.clone(), p);
    let out = leapfrog(
        &start,
        epsilon,
        config.n_leapfrog,
        &config.mass_diag,
        target,
        state.cached_grad.as_deref(),
        counters,
    );
    let n_leapfrog = config.n_leapfrog;
    let mut end = out.point;
    end.negate_momentum();
    let h1 = -out.logpi + kinetic_energy(&end.p, &config.mass_diag);
    let delta = h1 - h0;
    let divergent = out.divergence.is_some() || !h1.is_finite() || delta > DIVERGENCE_THRESHOLD;

    let log_alpha = if divergent { f64::NEG_INFINITY } else { (-delta).min(0.0) };
    let proposal = ChainState {
        position: end.q,
        cached_logpi: out.logpi,
        cached_grad: Some(out.grad),
        step_index: state.step_index,
    };
    let (next, accepted) = if divergent {
        let (s, _) = accept_or_reject(state.clone(), state, log_alpha, rng);
        (s, false)
    } else {
        accept_or_reject(state, proposal, log_alpha, rng)
    };
    Ok(Transition {
        state: next,
        accepted,
        accept_prob: log_alpha.exp(),
        divergent,
        n_leapfrog,
        tree_depth: 0,
    })
}
