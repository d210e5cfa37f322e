use super::TargetDensity;
use crate::error::{McmcError, Result};

/// Hierarchical funnel: `v ~ N(0, 9)`, `x_i | v ~ N(0, e^v)`.
/// Coordinates are ordered `(v, x_1, .., x_{d-1})`.
#[derive(Debug, Clone)]
pub struct Funnel {
    dim: usize,
}

impl Funnel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(McmcError::invalid("funnel needs d >= 2"));
        }
        Ok(Funnel { dim })
    }
}

impl TargetDensity for Funnel {
    fn name(&self) -> &str {
        "funnel"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        let v = x[0];
        let ss: f64 = x[1..].iter().map(|t| t * t).sum();
        let n = (self.dim - 1) as f64;
        let lp = -v * v / 18.0 - n * v / 2.0 - (-v).exp() * ss / 2.0;
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = x[0];
        let ev = (-v).exp();
        let ss: f64 = x[1..].iter().map(|t| t * t).sum();
        let n = (self.dim - 1) as f64;
        grad[0] = -v / 9.0 - n / 2.0 + ev * ss / 2.0;
        for (g, t) in grad[1..].iter_mut().zip(&x[1..]) {
            *g = -t * ev;
        }
        self.log_density(x)
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
}
