use super::TargetDensity;

/// Curved ridge: `log pi(x, y) = -(1-x)^2/2 - 100 (y - x^2)^2 / 20`.
#[derive(Debug, Clone, Copy)]
pub struct Banana;

impl TargetDensity for Banana {
    fn name(&self) -> &str {
        "banana"
    }
    fn dim(&self) -> usize {
        2
    }
    fn log_density(&self, p: &[f64]) -> f64 {
        let (x, y) = (p[0], p[1]);
        let r = y - x * x;
        -(1.0 - x) * (1.0 - x) / 2.0 - 5.0 * r * r
    }
    fn log_density_and_grad(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let (x, y) = (p[0], p[1]);
        let r = y - x * x;
        grad[0] = (1.0 - x) + 20.0 * x * r;
        grad[1] = -10.0 * r;
        self.log_density(p)
    }
    fn check_box(&self) -> Vec<(f64, f64)> {
        vec![(-2.0, 3.0), (-1.0, 5.0)]
    }
}
