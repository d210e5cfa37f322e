use crate::error::{McmcError, Result};

pub const MIN_MASS_SAMPLES: usize = 10;
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Diagonal mass `m_i = 1 / var_i` from warmup draws, so the kinetic
/// metric `M^{-1}` matches the sample variances. Variances are floored at
/// [`VARIANCE_FLOOR`].
pub fn estimate_mass_diag(warmup_samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = warmup_samples.len();
    if n < MIN_MASS_SAMPLES {
        return Err(McmcError::InsufficientData {
            needed: MIN_MASS_SAMPLES,
            got: n,
        });
    }
    let d = warmup_samples[0].len();
    let mut mean = vec![0.0; d];
    for row in warmup_samples {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in warmup_samples {
        for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    Ok(var
        .into_iter()
        .map(|v| 1.0 / (v / (n - 1) as f64).max(VARIANCE_FLOOR))
        .collect())
}
