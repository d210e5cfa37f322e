use super::surrogate::{surrogate_predict, SurrogateModel};
use crate::classic::RwmConfig;
use crate::error::Result;
use crate::mh::mh_accept_log_prob;
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

/// Result of a two-stage step.
#[derive(Debug, Clone)]
pub struct DaOutcome {
    pub transition: Transition,
    pub passed_screen: bool,
}

/// Two-stage Metropolis-Hastings with a random-walk inner kernel.
///
/// Stage 1 accepts with `min(1, pi_hat(x') / pi_hat(x))`. Survivors pay one
/// true evaluation and stage 2 accepts with
/// `min(1, pi(x') pi_hat(x) / (pi(x) pi_hat(x')))`, which leaves `pi`
/// exactly invariant. With `approximate` set, stage 2 is skipped and the
/// chain targets the surrogate instead; the cached log-density then holds
/// surrogate values.
pub fn delayed_acceptance_step(
    state: ChainState,
    inner: &RwmConfig,
    surrogate: &SurrogateModel,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
    approximate: bool,
) -> Result<DaOutcome> {
    let candidate: Vec<f64> = state
        .position
        .iter()
        .map(|x| x + inner.sigma * rng.normal())
        .collect();
    let hat_cur = surrogate_predict(surrogate, &state.position, counters).value;
    let hat_prop = surrogate_predict(surrogate, &candidate, counters).value;
    let log_a1 = (hat_prop - hat_cur).min(0.0);
    let next_index = state.step_index + 1;
    let reject = |state: ChainState, passed: bool| DaOutcome {
        transition: Transition::simple(
            ChainState {
                step_index: next_index,
                ..state
            },
            false,
            0.0,
        ),
        passed_screen: passed,
    };

    if !(rng.uniform().ln() < log_a1) {
        return Ok(reject(state, false));
    }
    if approximate {
        let next = ChainState {
            position: candidate,
            cached_logpi: hat_prop,
            cached_grad: None,
            step_index: next_index,
        };
        return Ok(DaOutcome {
            transition: Transition::simple(next, true, log_a1.exp()),
            passed_screen: true,
        });
    }

    let logpi_prop = counters.log_density(target, &candidate);
    // Stage-2 ratio is the Hastings ratio with the surrogate playing the
    // role of the proposal density.
    let log_a2 = mh_accept_log_prob(state.cached_logpi, logpi_prop, hat_prop, hat_cur)?;
    if rng.uniform().ln() < log_a2 {
        let next = ChainState {
            position: candidate,
            cached_logpi: logpi_prop,
            cached_grad: None,
            step_index: next_index,
        };
        Ok(DaOutcome {
            transition: Transition::simple(next, true, (log_a1 + log_a2).exp()),
            passed_screen: true,
        })
    } else {
        Ok(reject(state, true))
    }
}

/// Frozen delayed-acceptance kernel with stage statistics.
#[derive(Debug, Clone)]
pub struct DelayedAcceptance {
    pub inner: RwmConfig,
    pub surrogate: SurrogateModel,
    pub approximate: bool,
    pub proposed: u64,
    pub screened_in: u64,
    pub accepted: u64,
}

impl DelayedAcceptance {
    pub fn new(inner: RwmConfig, surrogate: SurrogateModel, approximate: bool) -> Self {
        DelayedAcceptance {
            inner,
            surrogate,
            approximate,
            proposed: 0,
            screened_in: 0,
            accepted: 0,
        }
    }

    pub fn step(
        &mut self,
        state: ChainState,
        target: &dyn TargetDensity,
        rng: &mut RngStream,
        counters: &mut EvalCounters,
    ) -> Result<Transition> {
        let out = delayed_acceptance_step(
            state,
            &self.inner,
            &self.surrogate,
            target,
            rng,
            counters,
            self.approximate,
        )?;
        self.proposed += 1;
        self.screened_in += out.passed_screen as u64;
        self.accepted += out.transition.accepted as u64;
        Ok(out.transition)
    }

    pub fn stage1_rate(&self) -> f64 {
        self.screened_in as f64 / self.proposed.max(1) as f64
    }

    /// Fraction of screened proposals accepted by the true density.
    pub fn stage2_rate(&self) -> f64 {
        self.accepted as f64 / self.screened_in.max(1) as f64
    }

    pub fn reset_stats(&mut self) {
        self.proposed = 0;
        self.screened_in = 0;
        self.accepted = 0;
    }
}
