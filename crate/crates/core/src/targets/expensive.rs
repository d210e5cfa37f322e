use std::time::{Duration, Instant};

use super::TargetDensity;

/// Wraps a target with a busy-wait per evaluation, modelling a likelihood
/// whose cost dominates everything else.
#[derive(Debug)]
pub struct Expensive {
    inner: Box<dyn TargetDensity>,
    delay: Duration,
}

impl Expensive {
    pub fn new(inner: Box<dyn TargetDensity>, delay: Duration) -> Self {
        Expensive { inner, delay }
    }

    fn spin(&self) {
        let start = Instant::now();
        while start.elapsed() < self.delay {
            std::hint::spin_loop();
        }
    }
}

impl TargetDensity for Expensive {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        self.spin();
        self.inner.log_density(x)
    }
    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.spin();
        self.inner.log_density_and_grad(x, grad)
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        self.inner.analytic_mean()
    }
    fn analytic_cov(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.analytic_cov()
    }
    fn fcd_support(&self) -> bool {
        self.inner.fcd_support()
    }
    fn check_box(&self) -> Vec<(f64, f64)> {
        self.inner.check_box()
    }
}
