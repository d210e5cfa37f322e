//! Efficiency diagnostics over completed chains: autocorrelation, ESS,
//! split R-hat, ESJD, batch-means asymptotic variance, and the aggregate
//! report written by the experiment runner.

mod autocorr;
mod report;
mod rhat;

pub use autocorr::{autocorrelation, autocovariance_fft, batch_means_variance, esjd, ess};
pub use report::{build_report, DiagnosticsReport, RHAT_GOOD, RHAT_WARNING};
pub use rhat::gelman_rubin;

use crate::error::{McmcError, Result};

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Rejects series with no spread.
pub(crate) fn check_nondegenerate(series: &[f64]) -> Result<()> {
    let first = series.first().copied().unwrap_or(0.0);
    if series.iter().all(|v| *v == first) {
        return Err(McmcError::DegenerateChain(format!(
            "series of length {} is constant",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(McmcError::DegenerateChain("series has non-finite values".into()));
    }
    Ok(())
}
