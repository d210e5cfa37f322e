use super::{logsumexp2, TargetDensity};
use crate::error::{McmcError, Result};

/// Two unit-covariance Gaussians at `-mu` (weight `w`) and `+mu`
/// (weight `1 - w`), with `mu = (separation / 2) e_1`.
#[derive(Debug, Clone)]
pub struct BimodalMixture {
    dim: usize,
    half_sep: f64,
    weight: f64,
}

impl BimodalMixture {
    pub fn new(dim: usize, separation: f64, weight: f64) -> Result<Self> {
        if dim == 0 {
            return Err(McmcError::invalid("dimension must be at least 1"));
        }
        if !(separation >= 0.0) || !separation.is_finite() {
            return Err(McmcError::invalid("separation must be non-negative"));
        }
        if !(weight > 0.0 && weight < 1.0) {
            return Err(McmcError::invalid(format!("weight must lie in (0,1), got {weight}")));
        }
        Ok(BimodalMixture {
            dim,
            half_sep: separation / 2.0,
            weight,
        })
    }

    /// Log of the unnormalized component terms `(log w N(-mu), log (1-w) N(+mu))`.
    fn component_logs(&self, x: &[f64]) -> (f64, f64) {
        let rest: f64 = x[1..].iter().map(|v| v * v).sum();
        let a = x[0] + self.half_sep;
        let b = x[0] - self.half_sep;
        (
            self.weight.ln() - 0.5 * (a * a + rest),
            (1.0 - self.weight).ln() - 0.5 * (b * b + rest),
        )
    }

    /// Posterior probability of the `+mu` component.
    pub fn upper_responsibility(&self, x: &[f64]) -> f64 {
        let (la, lb) = self.component_logs(x);
        1.0 / (1.0 + (la - lb).exp())
    }

    pub fn mode(&self, upper: bool) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        m[0] = if upper { self.half_sep } else { -self.half_sep };
        m
    }
}

impl TargetDensity for BimodalMixture {
    fn name(&self) -> &str {
        "bimodal_mixture"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        let (la, lb) = self.component_logs(x);
        logsumexp2(la, lb)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (la, lb) = self.component_logs(x);
        let lse = logsumexp2(la, lb);
        let r_lo = (la - lse).exp();
        let r_hi = (lb - lse).exp();
        for (g, v) in grad.iter_mut().zip(x) {
            *g = -v;
        }
        grad[0] -= (r_lo - r_hi) * self.half_sep;
        lse
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        let mut m = vec![0.0; self.dim];
        m[0] = (1.0 - 2.0 * self.weight) * self.half_sep;
        Some(m)
    }
    fn check_box(&self) -> Vec<(f64, f64)> {
        vec![(-(self.half_sep + 3.0), self.half_sep + 3.0); self.dim]
    }
}
