use crate::error::{McmcError, Result};
use crate::gradient::{kinetic_energy, leapfrog, PhasePoint};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters};
use crate::targets::TargetDensity;

pub const MAX_EPSILON_ITERATIONS: usize = 100;

/// Doubles or halves a unit step size until the one-step Metropolis ratio
/// `exp(-dH)` crosses 1/2. The momentum is drawn once, up front.
pub fn find_reasonable_epsilon(
    state: &ChainState,
    mass_diag: &[f64],
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<f64> {
    let grad = match &state.cached_grad {
        Some(g) => g.clone(),
        None => {
            let mut g = vec![0.0; state.dim()];
            counters.log_density_and_grad(target, &state.position, &mut g);
            g
        }
    };
    let p: Vec<f64> = mass_diag.iter().map(|m| m.sqrt() * rng.normal()).collect();
    let start = PhasePoint::new(state.position.clone(), p);
    let h0 = -state.cached_logpi + kinetic_energy(&start.p, mass_diag);
    let log_ratio = |eps: f64, counters: &mut EvalCounters| -> f64 {
        let out = leapfrog(&start, eps, 1, mass_diag, target, Some(&grad), counters);
        let h1 = -out.logpi + kinetic_energy(&out.point.p, mass_diag);
        let lr = h0 - h1;
        if out.divergence.is_some() || lr.is_nan() {
            f64::NEG_INFINITY
        } else {
            lr
        }
    };

    let ln_half = -std::f64::consts::LN_2;
    let mut eps = 1.0;
    let mut lr = log_ratio(eps, counters);
    let direction = if lr > ln_half { 1.0 } else { -1.0 };
    let mut iterations = 0;
    while direction * lr > direction * ln_half {
        iterations += 1;
        if iterations > MAX_EPSILON_ITERATIONS {
            return Err(McmcError::Initialization { iterations: MAX_EPSILON_ITERATIONS });
        }
        eps *= 2f64.powf(direction);
        lr = log_ratio(eps, counters);
    }
    Ok(eps)
}
