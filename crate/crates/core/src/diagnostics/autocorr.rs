use rustfft::{num_complex::Complex, FftPlanner};

use super::{check_nondegenerate, mean};
use crate::error::{McmcError, Result};

/// Biased sample autocorrelation `c_k / c_0` for lags `0..=max_lag`,
/// computed directly.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 * max_lag || n < 2 {
        return Err(McmcError::invalid(format!(
            "autocorrelation to lag {max_lag} needs at least {} points, got {n}",
            (2 * max_lag).max(2)
        )));
    }
    check_nondegenerate(series)?;
    let m = mean(series);
    let dev: Vec<f64> = series.iter().map(|x| x - m).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum::<f64>();
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let ck: f64 = dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum();
            (ck / c0).clamp(-1.0, 1.0)
        })
        .collect())
}

/// Biased autocovariances `c_0..c_{n-1}` via zero-padded FFT.
pub fn autocovariance_fft(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let m = mean(series);
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|x| Complex::new(x - m, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[..n].iter().map(|z| z.re / (len as f64 * n as f64)).collect()
}

/// Effective sample size with Geyer's initial positive sequence: the
/// autocorrelation sum is truncated before the first pair
/// `rho_{2k} + rho_{2k+1}` that is not positive. Clamped to `N`.
pub fn ess(series: &[f64]) -> Result<f64> {
    check_nondegenerate(series)?;
    let n = series.len();
    if n < 4 {
        return Err(McmcError::InsufficientData { needed: 4, got: n });
    }
    let acov = autocovariance_fft(series);
    let c0 = acov[0];
    if c0 <= 0.0 {
        return Err(McmcError::DegenerateChain("zero sample variance".into()));
    }
    let mut pair_sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = (acov[2 * k] + acov[2 * k + 1]) / c0;
        if gamma <= 0.0 {
            break;
        }
        pair_sum += gamma;
        k += 1;
    }
    let tau = 2.0 * pair_sum - 1.0;
    let n = n as f64;
    if tau <= 1.0 {
        return Ok(n);
    }
    Ok((n / tau).min(n))
}

/// Expected squared jump distance of a row-major sample matrix.
pub fn esjd(rows: &[Vec<f64>]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(McmcError::InsufficientData { needed: 2, got: rows.len() });
    }
    let total: f64 = rows
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>())
        .sum();
    Ok(total / (rows.len() - 1) as f64)
}

/// Batch-means estimate of the asymptotic variance: variance of the batch
/// means times the batch length. Trailing points that do not fill a batch
/// are dropped.
pub fn batch_means_variance(series: &[f64], n_batches: usize) -> Result<f64> {
    if n_batches < 10 {
        return Err(McmcError::invalid(format!(
            "batch means needs at least 10 batches, got {n_batches}"
        )));
    }
    if series.len() < 2 * n_batches {
        return Err(McmcError::InsufficientData {
            needed: 2 * n_batches,
            got: series.len(),
        });
    }
    let b = series.len() / n_batches;
    let means: Vec<f64> = series.chunks_exact(b).take(n_batches).map(mean).collect();
    let grand = mean(&means);
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (n_batches - 1) as f64;
    Ok(var * b as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn ar1(rho: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        let s = (1.0 - rho * rho).sqrt();
        let mut x = rng.normal();
        (0..n)
            .map(|_| {
                let out = x;
                x = rho * x + s * rng.normal();
                out
            })
            .collect()
    }

    #[test]
    fn lag_zero_is_one() {
        let xs = ar1(0.3, 50, 1);
        assert_eq!(autocorrelation(&xs, 10).unwrap()[0], 1.0);
    }

    #[test]
    fn alternating_series() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorrelation(&xs, 1).unwrap();
        assert!((r[1] + 999.0 / 1000.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_autocorrelation() {
        let xs = ar1(0.5, 100_000, 2);
        let r = autocorrelation(&xs, 5).unwrap();
        for (k, v) in r.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32)).abs() < 0.02, "lag {k}: {v}");
        }
    }

    #[test]
    fn fft_matches_direct() {
        let xs = ar1(0.7, 3001, 3);
        let direct = autocorrelation(&xs, 40).unwrap();
        let acov = autocovariance_fft(&xs);
        for k in 0..=40 {
            assert!((acov[k] / acov[0] - direct[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn ess_iid_and_ar1() {
        let n = 100_000;
        let iid = ar1(0.0, n, 4);
        let r = ess(&iid).unwrap() / n as f64;
        assert!((0.95..=1.0).contains(&r), "{r}");
        let r = ess(&ar1(0.5, n, 5)).unwrap() / n as f64;
        assert!((r - 1.0 / 3.0).abs() < 0.1 / 3.0, "{r}");
    }

    #[test]
    fn ess_duplicated_pairs() {
        let base = ar1(0.0, 50_000, 6);
        let dup: Vec<f64> = base.iter().flat_map(|v| [*v, *v]).collect();
        let r = ess(&dup).unwrap() / dup.len() as f64;
        assert!((r - 0.5).abs() < 0.05, "{r}");
    }

    #[test]
    fn degenerate_series() {
        assert!(matches!(ess(&[2.0; 100]), Err(McmcError::DegenerateChain(_))));
        assert!(matches!(autocorrelation(&[2.0; 100], 3), Err(McmcError::DegenerateChain(_))));
    }

    #[test]
    fn esjd_examples() {
        let rows = vec![vec![0.0], vec![1.0], vec![3.0]];
        assert_eq!(esjd(&rows).unwrap(), 2.5);
        assert_eq!(esjd(&vec![vec![1.0, 1.0]; 5]).unwrap(), 0.0);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| vec![3.0 * r[0]]).collect();
        assert_eq!(esjd(&scaled).unwrap(), 9.0 * 2.5);
    }

    #[test]
    fn batch_means_examples() {
        let v = batch_means_variance(&ar1(0.0, 100_000, 7), 100).unwrap();
        assert!((v - 1.0).abs() < 0.15, "{v}");
        let v = batch_means_variance(&ar1(0.5, 100_000, 8), 100).unwrap();
        assert!((v - 3.0).abs() < 0.45, "{v}");
        assert_eq!(batch_means_variance(&[1.5; 200], 10).unwrap(), 0.0);
        assert!(batch_means_variance(&[1.0; 200], 9).is_err());
    }
}
