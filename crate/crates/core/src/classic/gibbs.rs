use nalgebra::{DMatrix, DVector};

use crate::error::{McmcError, Result};
use crate::rng::RngStream;
use crate::state::{ChainState, EvalCounters, Transition};
use crate::targets::TargetDensity;

/// One slot of a Gibbs scan: draws coordinate `index` given the others.
pub trait FullConditional: Send {
    fn draw(
        &mut self,
        index: usize,
        x: &[f64],
        target: &dyn TargetDensity,
        rng: &mut RngStream,
        counters: &mut EvalCounters,
    ) -> f64;

    /// Per-slot acceptance rate for Metropolis-within-Gibbs slots.
    fn acceptance_rate(&self) -> Option<f64> {
        None
    }

    /// Fixed parameters of the slot, used to fingerprint a frozen kernel.
    fn parameters(&self) -> Vec<f64>;
}

/// Exact Normal conditional of one coordinate of a multivariate Gaussian.
#[derive(Debug, Clone)]
pub struct GaussianConditional {
    index: usize,
    mean: Vec<f64>,
    /// Regression coefficients on every coordinate; zero at `index`.
    coeffs: Vec<f64>,
    variance: f64,
}

impl GaussianConditional {
    pub fn conditional_mean(&self, x: &[f64]) -> f64 {
        self.mean[self.index]
            + self
                .coeffs
                .iter()
                .zip(x.iter().zip(&self.mean))
                .map(|(b, (xj, mj))| b * (xj - mj))
                .sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl FullConditional for GaussianConditional {
    fn draw(
        &mut self,
        _index: usize,
        x: &[f64],
        _target: &dyn TargetDensity,
        rng: &mut RngStream,
        _counters: &mut EvalCounters,
    ) -> f64 {
        self.conditional_mean(x) + self.variance.sqrt() * rng.normal()
    }

    fn parameters(&self) -> Vec<f64> {
        let mut p = self.mean.clone();
        p.extend_from_slice(&self.coeffs);
        p.push(self.variance);
        p
    }
}

/// Builds the Normal full conditional of coordinate `index` for
/// `N(mean, cov)`.
pub fn gaussian_fcd(mean: &[f64], cov: &[Vec<f64>], index: usize) -> Result<GaussianConditional> {
    let d = mean.len();
    if cov.len() != d || cov.iter().any(|r| r.len() != d) || index >= d {
        return Err(McmcError::invalid("covariance shape does not match mean"));
    }
    let full = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    if (0..d).any(|i| (0..d).any(|j| (cov[i][j] - cov[j][i]).abs() > 1e-12 * cov[i][i].abs().max(1.0))) {
        return Err(McmcError::Decomposition("covariance is not symmetric".into()));
    }
    if full.clone().cholesky().is_none() {
        return Err(McmcError::Decomposition("covariance is not positive definite".into()));
    }
    let others: Vec<usize> = (0..d).filter(|j| *j != index).collect();
    let mut coeffs = vec![0.0; d];
    let mut variance = cov[index][index];
    if !others.is_empty() {
        let sub = DMatrix::from_fn(others.len(), others.len(), |a, b| cov[others[a]][others[b]]);
        let cross = DVector::from_iterator(others.len(), others.iter().map(|j| cov[*j][index]));
        let chol = sub
            .cholesky()
            .ok_or_else(|| McmcError::Decomposition("conditioning block not SPD".into()))?;
        let beta = chol.solve(&cross);
        variance -= cross.dot(&beta);
        for (k, j) in others.iter().enumerate() {
            coeffs[*j] = beta[k];
        }
    }
    if !(variance > 0.0) {
        return Err(McmcError::Decomposition(format!(
            "conditional variance {variance} for coordinate {index}"
        )));
    }
    Ok(GaussianConditional {
        index,
        mean: mean.to_vec(),
        coeffs,
        variance,
    })
}

/// Metropolis-within-Gibbs slot: a one-dimensional random walk on the
/// conditional, scored with the joint density.
#[derive(Debug, Clone)]
pub struct RwmConditional {
    pub sigma: f64,
    proposed: u64,
    accepted: u64,
}

impl RwmConditional {
    pub fn new(sigma: f64) -> Self {
        RwmConditional {
            sigma,
            proposed: 0,
            accepted: 0,
        }
    }
}

impl FullConditional for RwmConditional {
    fn draw(
        &mut self,
        index: usize,
        x: &[f64],
        target: &dyn TargetDensity,
        rng: &mut RngStream,
        counters: &mut EvalCounters,
    ) -> f64 {
        let current = counters.log_density(target, x);
        let mut moved = x.to_vec();
        moved[index] += self.sigma * rng.normal();
        let proposed = counters.log_density(target, &moved);
        self.proposed += 1;
        let log_alpha = (proposed - current).min(0.0);
        if !log_alpha.is_nan() && rng.uniform().ln() < log_alpha {
            self.accepted += 1;
            moved[index]
        } else {
            x[index]
        }
    }

    fn acceptance_rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    fn parameters(&self) -> Vec<f64> {
        vec![self.sigma]
    }
}

/// Ordered conditionals, one per coordinate.
pub struct FullConditionalSet {
    slots: Vec<Box<dyn FullConditional>>,
}

impl std::fmt::Debug for FullConditionalSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FullConditionalSet").field("slots", &self.slots.len()).finish()
    }
}

impl FullConditionalSet {
    pub fn new(slots: Vec<Box<dyn FullConditional>>) -> Self {
        FullConditionalSet { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.slots.iter().flat_map(|s| s.parameters()).collect()
    }

    pub fn slot_acceptance_rates(&self) -> Vec<Option<f64>> {
        self.slots.iter().map(|s| s.acceptance_rate()).collect()
    }

    pub fn metropolis_within_gibbs(dim: usize, sigma: f64) -> Self {
        FullConditionalSet::new(
            (0..dim)
                .map(|_| Box::new(RwmConditional::new(sigma)) as Box<dyn FullConditional>)
                .collect(),
        )
    }
}

/// Exact Gaussian conditionals from a target's analytic moments.
pub fn exact_gaussian_conditionals(target: &dyn TargetDensity) -> Result<FullConditionalSet> {
    let (Some(mean), Some(cov)) = (target.analytic_mean(), target.analytic_cov()) else {
        return Err(McmcError::invalid(format!(
            "{} has no analytic moments for exact conditionals",
            target.name()
        )));
    };
    if !target.fcd_support() {
        return Err(McmcError::invalid(format!("{} has no tractable conditionals", target.name())));
    }
    let slots = (0..mean.len())
        .map(|i| gaussian_fcd(&mean, &cov, i).map(|c| Box::new(c) as Box<dyn FullConditional>))
        .collect::<Result<Vec<_>>>()?;
    Ok(FullConditionalSet::new(slots))
}

/// One systematic scan over coordinates `0..d`, each drawn from its
/// conditional given the freshest values of the rest. The log-density
/// cache is refreshed once at the end of the scan.
pub fn gibbs_step(
    state: ChainState,
    fcds: &mut FullConditionalSet,
    target: &dyn TargetDensity,
    rng: &mut RngStream,
    counters: &mut EvalCounters,
) -> Result<Transition> {
    if fcds.len() != target.dim() {
        return Err(McmcError::invalid(format!(
            "{} conditionals for a {}-dimensional target",
            fcds.len(),
            target.dim()
        )));
    }
    let mut x = state.position;
    for (i, slot) in fcds.slots.iter_mut().enumerate() {
        let v = slot.draw(i, &x, target, rng, counters);
        if !v.is_finite() {
            return Err(McmcError::Conditional { index: i });
        }
        x[i] = v;
    }
    let logpi = counters.log_density(target, &x);
    if !logpi.is_finite() {
        return Err(McmcError::InvalidState("Gibbs scan left the support".into()));
    }
    let next = ChainState {
        position: x,
        cached_logpi: logpi,
        cached_grad: None,
        step_index: state.step_index + 1,
    };
    Ok(Transition::simple(next, true, 1.0))
}
