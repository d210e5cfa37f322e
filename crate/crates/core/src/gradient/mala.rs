use super::ensure_grad;
use crate::classic::Proposal;
use crate::error::{McmcError, Result};
use crate::mh::{accept_or_reject, mh_accept_log_prob};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

/// Langevin drift target `x + (eps^2 / 2) grad log pi(x)`.
pub fn mala_proposal_mean(x: &[f64], grad: &[f64], epsilon: f64) -> Vec<f64> {
    let h = 0.5 * epsilon * epsilon;
    x.iter().zip(grad).map(|(x, g)| x + h * g).collect()
}

fn log_q(to: &[f64], mean: &[f64], epsilon: f64) -> f64 {
    let ss: f64 = to.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
    -ss / (2.0 * epsilon * epsilon)
}

/// Metropolis-adjusted Langevin step with the full Hastings correction.
pub fn mala_step(
    mut state: ChainState,
    epsilon: f64,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    if !(epsilon > 0.0) {
        return Err(McmcError::invalid("epsilon must be positive"));
    }
    ensure_grad(&mut state, target, counters)?;
    let grad = state.cached_grad.as_deref().expect("gradient cached");
    let fwd_mean = mala_proposal_mean(&state.position, grad, epsilon);
    let candidate: Vec<f64> = fwd_mean.iter().map(|m| m + epsilon * rng.normal()).collect();

    let mut cand_grad = vec![0.0; candidate.len()];
    let logpi_prop = counters.log_density_and_grad(target, &candidate, &mut cand_grad);
    let usable = logpi_prop.is_finite() && cand_grad.iter().all(|g| g.is_finite());
    let log_alpha = if usable {
        let bwd_mean = mala_proposal_mean(&candidate, &cand_grad, epsilon);
        let logg_fwd = log_q(&candidate, &fwd_mean, epsilon);
        let logg_bwd = log_q(&state.position, &bwd_mean, epsilon);
        mh_accept_log_prob(state.cached_logpi, logpi_prop, logg_fwd, logg_bwd)?
    } else {
        f64::NEG_INFINITY
    };
    let proposal = ChainState {
        position: candidate,
        cached_logpi: if usable { logpi_prop } else { state.cached_logpi },
        cached_grad: Some(cand_grad),
        step_index: state.step_index,
    };
    let (next, accepted) = if usable {
        accept_or_reject(state, proposal, log_alpha, rng)
    } else {
        let (s, _) = accept_or_reject(state.clone(), state, log_alpha, rng);
        (s, false)
    };
    Ok(Transition::simple(next, accepted, log_alpha.exp()))
}

/// The MALA kernel as a generic [`Proposal`], for use with `mh_step`.
pub struct LangevinProposal<'a> {
    pub target: &'a dyn TargetDensity,
    pub epsilon: f64,
}

impl Proposal for LangevinProposal<'_> {
    fn sample(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let mut g = vec![0.0; from.len()];
        self.target.log_density_and_grad(from, &mut g);
        mala_proposal_mean(from, &g, self.epsilon)
            .into_iter()
            .map(|m| m + self.epsilon * rng.normal())
            .collect()
    }

    fn log_density(&self, to: &[f64], from: &[f64]) -> f64 {
        let mut g = vec![0.0; from.len()];
        self.target.log_density_and_grad(from, &mut g);
        log_q(to, &mala_proposal_mean(from, &g, self.epsilon), self.epsilon)
    }
}
