//! The Metropolis-Hastings acceptance kernel shared by every sampler, and an
//! exact finite-state check of stationarity and detailed balance.

use crate::error::{McmcError, Result};
use crate::rng::RngStream;
use crate::state::ChainState;

/// Log acceptance probability
/// `min(0, (logpi_prop - logpi_cur) + (logg_bwd - logg_fwd))`.
///
/// `logg_fwd` is `log g(x'|x)` and `logg_bwd` is `log g(x|x')`; a symmetric
/// proposal passes zero for both. A proposal outside the support
/// (`logpi_prop = -inf`) yields `-inf`. The result is never NaN.
pub fn mh_accept_log_prob(
    logpi_cur: f64,
    logpi_prop: f64,
    logg_fwd: f64,
    logg_bwd: f64,
) -> Result<f64> {
    if !logpi_cur.is_finite() {
        return Err(McmcError::InvalidState(format!(
            "current log-density is {logpi_cur}"
        )));
    }
    if logpi_prop.is_nan() || logpi_prop == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let log_ratio = (logpi_prop - logpi_cur) + (logg_bwd - logg_fwd);
    if log_ratio.is_nan() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_ratio.min(0.0))
}

/// Consumes exactly one uniform draw and accepts when `ln(u) < log_alpha`.
/// Returns the next state and whether the proposal was taken.
pub fn accept_or_reject(
    state: ChainState,
    proposal: ChainState,
    log_alpha: f64,
    rng: &mut RngStream,
) -> (ChainState, bool) {
    debug_assert!(log_alpha <= 0.0 || log_alpha.is_nan());
    let u = rng.uniform();
    let next_index = state.step_index + 1;
    if u.ln() < log_alpha {
        let mut next = proposal;
        next.step_index = next_index;
        (next, true)
    } else {
        let mut next = state;
        next.step_index = next_index;
        (next, false)
    }
}

/// Result of [`discrete_stationarity_oracle`].
#[derive(Debug, Clone)]
pub struct StationarityReport {
    /// `max_i |(pi P - pi)_i|`.
    pub max_deviation: f64,
    /// `max_ij |pi_i P_ij - pi_j P_ji|`.
    pub detailed_balance_violation: f64,
    pub transition: Vec<Vec<f64>>,
}

/// Builds the exact Metropolis-Hastings transition matrix on a finite state
/// space and measures how far `pi` is from being stationary for it.
pub fn discrete_stationarity_oracle(
    pi: &[f64],
    proposal_matrix: &[Vec<f64>],
) -> Result<StationarityReport> {
    let k = pi.len();
    if k == 0 {
        return Err(McmcError::invalid("empty state space"));
    }
    if (pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(McmcError::invalid("pi does not sum to 1"));
    }
    if pi.iter().any(|p| !(*p > 0.0)) {
        return Err(McmcError::invalid("pi must be strictly positive"));
    }
    if proposal_matrix.len() != k {
        return Err(McmcError::invalid("proposal matrix has wrong row count"));
    }
    for (i, row) in proposal_matrix.iter().enumerate() {
        if row.len() != k {
            return Err(McmcError::invalid(format!("proposal row {i} has wrong length")));
        }
        if row.iter().any(|g| !(*g >= 0.0)) {
            return Err(McmcError::invalid(format!("proposal row {i} has a negative entry")));
        }
        if (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(McmcError::invalid(format!("proposal row {i} is not stochastic")));
        }
    }

    let g = proposal_matrix;
    let mut p = vec![vec![0.0; k]; k];
    for i in 0..k {
        let mut off = 0.0;
        for j in 0..k {
            if i == j || g[i][j] == 0.0 {
                continue;
            }
            let ratio = (pi[j] * g[j][i]) / (pi[i] * g[i][j]);
            p[i][j] = g[i][j] * ratio.min(1.0);
            off += p[i][j];
        }
        p[i][i] = 1.0 - off;
    }

    let mut max_deviation: f64 = 0.0;
    for j in 0..k {
        let flow: f64 = (0..k).map(|i| pi[i] * p[i][j]).sum();
        max_deviation = max_deviation.max((flow - pi[j]).abs());
    }
    let mut detailed_balance_violation: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let v = (pi[i] * p[i][j] - pi[j] * p[j][i]).abs();
            detailed_balance_violation = detailed_balance_violation.max(v);
        }
    }
    Ok(StationarityReport {
        max_deviation,
        detailed_balance_violation,
        transition: p,
    })
}
