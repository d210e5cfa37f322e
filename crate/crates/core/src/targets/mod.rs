//! Analytic test distributions with exact log-densities, gradients and,
//! where they exist, moments. Normalizing constants are dropped throughout.

mod banana;
mod expensive;
mod funnel;
mod gaussian;
mod mixture;
mod spec;

pub use banana::Banana;
pub use expensive::Expensive;
pub use funnel::Funnel;
pub use gaussian::{Ar1Gaussian, DiagonalGaussian, Flat, StandardGaussian};
pub use mixture::BimodalMixture;
pub use spec::{TargetConfig, TargetSpec};

use crate::error::{McmcError, Result};

/// An unnormalized log-density over `R^d`.
///
/// Implementations are immutable after construction and shared by
/// reference across concurrently running chains.
pub trait TargetDensity: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// `log pi(x)` up to an additive constant; `-inf` outside the support,
    /// never NaN for finite input.
    fn log_density(&self, x: &[f64]) -> f64;

    fn has_gradient(&self) -> bool {
        true
    }

    /// Writes `grad log pi(x)` into `grad` and returns `log pi(x)`.
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn analytic_mean(&self) -> Option<Vec<f64>> {
        None
    }

    fn analytic_cov(&self) -> Option<Vec<Vec<f64>>> {
        None
    }

    /// Whether exact full conditionals are available (Gaussian targets).
    fn fcd_support(&self) -> bool {
        false
    }

    /// Box on which the density is finite and gradients are checked.
    fn check_box(&self) -> Vec<(f64, f64)> {
        vec![(-3.0, 3.0); self.dim()]
    }
}

pub fn make_standard_gaussian(d: usize) -> Result<StandardGaussian> {
    StandardGaussian::new(d)
}

pub fn make_ar1_gaussian(d: usize, rho: f64) -> Result<Ar1Gaussian> {
    Ar1Gaussian::new(d, rho)
}

pub fn make_funnel(d: usize) -> Result<Funnel> {
    Funnel::new(d)
}

pub fn make_banana() -> Banana {
    Banana
}

pub fn make_bimodal_mixture(d: usize, separation: f64, weight: f64) -> Result<BimodalMixture> {
    BimodalMixture::new(d, separation, weight)
}

/// Largest per-coordinate discrepancy between the analytic gradient and
/// central differences, `|fd_i - grad_i| / max(1, |grad_i|)`.
pub fn fd_gradient_check(target: &dyn TargetDensity, x: &[f64], h: f64) -> Result<f64> {
    if !target.has_gradient() {
        return Err(McmcError::invalid(format!("{} has no gradient", target.name())));
    }
    if x.len() != target.dim() || !(h > 0.0) {
        return Err(McmcError::invalid("bad point or step for finite differences"));
    }
    let mut grad = vec![0.0; x.len()];
    target.log_density_and_grad(x, &mut grad);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = target.log_density(&probe);
        probe[i] = x[i] - h;
        let down = target.log_density(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(McmcError::Stencil { coordinate: i });
        }
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / grad[i].abs().max(1.0));
    }
    Ok(worst)
}

/// `n` Halton points scaled into the target's check box.
pub fn check_points(target: &dyn TargetDensity, n: usize) -> Vec<Vec<f64>> {
    let bounds = target.check_box();
    (1..=n as u64)
        .map(|k| {
            crate::rng::halton(k, bounds.len())
                .into_iter()
                .zip(&bounds)
                .map(|(u, (lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect()
}

pub(crate) fn logsumexp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}
