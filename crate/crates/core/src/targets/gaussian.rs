use super::TargetDensity;
use crate::error::{McmcError, Result};

/// `log pi(x) = -|x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct StandardGaussian {
    dim: usize,
}

impl StandardGaussian {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(McmcError::invalid("dimension must be at least 1"));
        }
        Ok(StandardGaussian { dim })
    }
}

impl TargetDensity for StandardGaussian {
    fn name(&self) -> &str {
        "standard_gaussian"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        for (g, v) in grad.iter_mut().zip(x) {
            *g = -v;
        }
        self.log_density(x)
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
    fn analytic_cov(&self) -> Option<Vec<Vec<f64>>> {
        Some(identity(self.dim))
    }
    fn fcd_support(&self) -> bool {
        true
    }
}

/// Zero-mean Gaussian with independent coordinates of the given variances.
#[derive(Debug, Clone)]
pub struct DiagonalGaussian {
    variances: Vec<f64>,
}

impl DiagonalGaussian {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() || variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(McmcError::invalid("variances must be positive and finite"));
        }
        Ok(DiagonalGaussian { variances })
    }
}

impl TargetDensity for DiagonalGaussian {
    fn name(&self) -> &str {
        "diagonal_gaussian"
    }
    fn dim(&self) -> usize {
        self.variances.len()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().zip(&self.variances).map(|(v, s)| v * v / s).sum::<f64>()
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        for ((g, v), s) in grad.iter_mut().zip(x).zip(&self.variances) {
            *g = -v / s;
        }
        self.log_density(x)
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim()])
    }
    fn analytic_cov(&self) -> Option<Vec<Vec<f64>>> {
        let mut c = identity(self.dim());
        for (i, s) in self.variances.iter().enumerate() {
            c[i][i] = *s;
        }
        Some(c)
    }
    fn fcd_support(&self) -> bool {
        true
    }
    fn check_box(&self) -> Vec<(f64, f64)> {
        self.variances.iter().map(|s| (-3.0 * s.sqrt(), 3.0 * s.sqrt())).collect()
    }
}

/// Zero-mean Gaussian with `Sigma_ij = rho^|i-j|`, evaluated through its
/// tridiagonal precision matrix.
#[derive(Debug, Clone)]
pub struct Ar1Gaussian {
    dim: usize,
    rho: f64,
}

impl Ar1Gaussian {
    pub fn new(dim: usize, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(McmcError::invalid("dimension must be at least 1"));
        }
        if !(rho.abs() < 1.0) {
            return Err(McmcError::invalid(format!("|rho| must be < 1, got {rho}")));
        }
        Ok(Ar1Gaussian { dim, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `Q x` for the precision `Q = Sigma^{-1}`.
    pub fn precision_times(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        if d == 1 {
            out[0] = x[0];
            return;
        }
        let r = self.rho;
        let scale = 1.0 / (1.0 - r * r);
        for i in 0..d {
            let diag = if i == 0 || i == d - 1 { 1.0 } else { 1.0 + r * r };
            let mut v = diag * x[i];
            if i > 0 {
                v -= r * x[i - 1];
            }
            if i + 1 < d {
                v -= r * x[i + 1];
            }
            out[i] = scale * v;
        }
    }
}

impl TargetDensity for Ar1Gaussian {
    fn name(&self) -> &str {
        "ar1_gaussian"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        let mut qx = vec![0.0; self.dim];
        self.precision_times(x, &mut qx);
        -0.5 * x.iter().zip(&qx).map(|(a, b)| a * b).sum::<f64>()
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.precision_times(x, grad);
        let quad: f64 = x.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
        for g in grad.iter_mut() {
            *g = -*g;
        }
        -0.5 * quad
    }
    fn analytic_mean(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
    fn analytic_cov(&self) -> Option<Vec<Vec<f64>>> {
        Some(
            (0..self.dim)
                .map(|i| {
                    (0..self.dim)
                        .map(|j| self.rho.powi((i as i32 - j as i32).abs()))
                        .collect()
                })
                .collect(),
        )
    }
    fn fcd_support(&self) -> bool {
        true
    }
}

/// Constant density on `R^d`; the free-particle case for integrators.
#[derive(Debug, Clone)]
pub struct Flat {
    dim: usize,
}

impl Flat {
    pub fn new(dim: usize) -> Self {
        Flat { dim }
    }
}

impl TargetDensity for Flat {
    fn name(&self) -> &str {
        "flat"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn log_density_and_grad(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        0.0
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
