//! Gradient-informed samplers: MALA, the leapfrog integrator, HMC and NUTS.

mod hmc;
mod integrator;
mod mala;
mod nuts;

pub use hmc::{hmc_step, HmcConfig};
pub use integrator::{hamiltonian, kinetic_energy, leapfrog, LeapfrogOutput, PhasePoint};
pub use mala::{mala_proposal_mean, mala_step, LangevinProposal};
pub use nuts::{is_u_turn, nuts_step, NutsConfig, MAX_TREE_DEPTH_LIMIT};

/// Energy error beyond which a trajectory is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

use crate::error::Result;
use crate::state::{ChainState, EvalCounters};
use crate::targets::TargetDensity;

/// Makes sure the state carries a gradient, evaluating it if needed.
pub(crate) fn ensure_grad(
    state: &mut ChainState,
    target: &dyn TargetDensity,
    counters: &mut EvalCounters,
) -> Result<()> {
    if state.cached_grad.is_none() {
        let mut g = vec![0.0; state.dim()];
        state.cached_logpi = counters.log_density_and_grad(target, &state.position, &mut g);
        state.cached_grad = Some(g);
    }
    Ok(())
}
